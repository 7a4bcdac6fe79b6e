#include "immse/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "immse/error.hpp"

namespace immse {

namespace {

using json = nlohmann::json;

// Parsing collects every problem instead of stopping at the first one.
class Collector {
 public:
  void add(std::string msg) { problems_.push_back(std::move(msg)); }
  bool empty() const { return problems_.empty(); }
  std::string joined() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < problems_.size(); ++i) {
      out << (i ? "; " : "") << problems_[i];
    }
    return out.str();
  }

 private:
  std::vector<std::string> problems_;
};

std::optional<double> number(const json& j, const std::string& where,
                             Collector& bad) {
  if (!j.is_number()) {
    bad.add(where + " must be a number");
    return std::nullopt;
  }
  return j.get<double>();
}

std::optional<Matrix> matrix(const json& doc, const char* key, Collector& bad) {
  if (!doc.contains(key)) {
    bad.add(std::string("missing required field \"") + key + "\"");
    return std::nullopt;
  }
  const json& rows = doc.at(key);
  if (!rows.is_array() || rows.empty()) {
    bad.add(std::string(key) + " must be a non-empty array of rows");
    return std::nullopt;
  }
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].empty()) {
      bad.add(std::string(key) + " row " + std::to_string(i) +
              " must be a non-empty array");
      return std::nullopt;
    }
    if (i == 0) cols = rows[i].size();
    if (rows[i].size() != cols) {
      bad.add(std::string(key) + " is ragged: row " + std::to_string(i) + " has " +
              std::to_string(rows[i].size()) + " entries, expected " +
              std::to_string(cols));
      return std::nullopt;
    }
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const auto v = number(rows[i][j], std::string(key) + "[" + std::to_string(i) +
                                            "][" + std::to_string(j) + "]",
                            bad);
      if (!v) return std::nullopt;
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *v;
    }
  }
  return m;
}

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed, Collector& bad) {
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) bad.add("unknown field \"" + k + "\" in " + where);
  }
}

void parse_distortion(const json& doc, ProblemConfig& cfg, Collector& bad) {
  if (!doc.contains("distortion")) return;
  const json& d = doc.at("distortion");
  if (!d.is_object()) {
    bad.add("distortion must be an object with \"grid\" or \"value\"");
    return;
  }
  check_keys(d, "distortion", {"grid", "value"}, bad);
  if (d.contains("grid") == d.contains("value")) {
    bad.add("distortion must contain exactly one of \"grid\" or \"value\"");
    return;
  }
  if (d.contains("value")) {
    if (auto v = number(d.at("value"), "distortion.value", bad)) {
      cfg.distortions = {*v};
    }
  } else {
    const json& g = d.at("grid");
    if (!g.is_array() || g.empty()) {
      bad.add("distortion.grid must be a non-empty array");
      return;
    }
    cfg.distortion_is_grid = true;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (auto v = number(g[i], "distortion.grid[" + std::to_string(i) + "]", bad)) {
        cfg.distortions.push_back(*v);
      }
    }
  }
  for (std::size_t i = 0; i < cfg.distortions.size(); ++i) {
    const double v = cfg.distortions[i];
    if (!(std::isfinite(v) && v > 0.0)) {
      std::ostringstream msg;
      msg << "distortion D = " << v << " must be positive";
      bad.add(msg.str());
    } else if (i > 0 && !(v > cfg.distortions[i - 1])) {
      bad.add("distortion.grid must be strictly ascending");
    }
  }
}

template <typename T>
std::optional<T> integer(const json& j, const std::string& where, Collector& bad) {
  if (!j.is_number_integer() || (j.is_number_integer() && j.get<long long>() < 0)) {
    bad.add(where + " must be a non-negative integer");
    return std::nullopt;
  }
  return j.get<T>();
}

void parse_sim(const json& doc, ProblemConfig& cfg, Collector& bad) {
  if (!doc.contains("sim")) return;
  const json& s = doc.at("sim");
  if (!s.is_object()) {
    bad.add("sim must be an object");
    return;
  }
  check_keys(s, "sim", {"dt", "horizon", "trials", "seed", "burn_in"}, bad);
  SimConfig sim;
  for (const char* key : {"dt", "horizon", "trials", "seed"}) {
    if (!s.contains(key)) bad.add(std::string("sim.") + key + " is required");
  }
  if (s.contains("dt")) {
    if (auto v = number(s.at("dt"), "sim.dt", bad)) sim.dt = *v;
  }
  if (s.contains("horizon")) {
    if (auto v = number(s.at("horizon"), "sim.horizon", bad)) sim.horizon = *v;
  }
  if (s.contains("trials")) {
    if (auto v = integer<std::uint64_t>(s.at("trials"), "sim.trials", bad)) sim.trials = *v;
  }
  if (s.contains("seed")) {
    if (auto v = integer<std::uint64_t>(s.at("seed"), "sim.seed", bad)) sim.seed = *v;
  }
  if (s.contains("burn_in")) {
    if (auto v = number(s.at("burn_in"), "sim.burn_in", bad)) sim.burn_in_fraction = *v;
  }
  try {
    sim.validate();
  } catch (const Error& e) {
    bad.add(e.what());
  }
  cfg.sim = sim;
}

void parse_zdsc(const json& doc, Eigen::Index n, ProblemConfig& cfg,
                Collector& bad) {
  if (!doc.contains("zdsc")) return;
  const json& z = doc.at("zdsc");
  if (!z.is_object()) {
    bad.add("zdsc must be an object");
    return;
  }
  check_keys(z, "zdsc", {"tau", "delta", "horizon", "trials"}, bad);
  ZdscConfig out;
  for (const char* key : {"tau", "delta", "horizon", "trials"}) {
    if (!z.contains(key)) bad.add(std::string("zdsc.") + key + " is required");
  }
  if (z.contains("tau")) {
    const json& t = z.at("tau");
    const json list = t.is_array() ? t : json::array({t});
    for (std::size_t i = 0; i < list.size(); ++i) {
      auto v = number(list[i], "zdsc.tau", bad);
      if (v && !(*v > 0.0)) bad.add("zdsc.tau must be positive");
      if (v) out.taus.push_back(*v);
    }
  }
  if (z.contains("delta")) {
    const json& d = z.at("delta");
    if (!d.is_array() || d.empty()) {
      bad.add("zdsc.delta must be a non-empty array");
    } else {
      // Each entry is one setting: a number applies to every coordinate, an
      // array gives one gain per coordinate.
      for (std::size_t i = 0; i < d.size(); ++i) {
        const std::string where = "zdsc.delta[" + std::to_string(i) + "]";
        Vector delta(n);
        bool ok = true;
        if (d[i].is_array()) {
          if (static_cast<Eigen::Index>(d[i].size()) != n) {
            bad.add(where + " must have " + std::to_string(n) + " entries");
            continue;
          }
          for (Eigen::Index k = 0; k < n; ++k) {
            auto v = number(d[i][static_cast<std::size_t>(k)], where, bad);
            ok = ok && v.has_value();
            if (v) delta(k) = *v;
          }
        } else {
          auto v = number(d[i], where, bad);
          ok = v.has_value();
          if (v) delta.setConstant(*v);
        }
        if (!ok) continue;
        if ((delta.array() <= 0.0).any() || !delta.allFinite()) {
          bad.add(where + " must be positive");
          continue;
        }
        out.deltas.push_back(delta);
      }
    }
  }
  if (z.contains("horizon")) {
    auto v = number(z.at("horizon"), "zdsc.horizon", bad);
    if (v && !(*v > 0.0)) bad.add("zdsc.horizon must be positive");
    if (v) out.horizon = *v;
  }
  if (z.contains("trials")) {
    auto v = integer<std::uint64_t>(z.at("trials"), "zdsc.trials", bad);
    if (v && *v < 1) bad.add("zdsc.trials must be >= 1");
    if (v) out.trials = *v;
  }
  cfg.zdsc = out;
}

void parse_tolerances(const json& doc, ProblemConfig& cfg, Collector& bad) {
  if (!doc.contains("tolerances")) return;
  const json& t = doc.at("tolerances");
  if (!t.is_object()) {
    bad.add("tolerances must be an object");
    return;
  }
  check_keys(t, "tolerances", {"eig_tol", "psd_tol", "gap_tol", "residual_tol"}, bad);
  auto read = [&](const char* key, double& field) {
    if (!t.contains(key)) return;
    if (auto v = number(t.at(key), std::string("tolerances.") + key, bad)) field = *v;
  };
  read("eig_tol", cfg.tolerances.eig_tol);
  read("psd_tol", cfg.tolerances.psd_tol);
  read("gap_tol", cfg.tolerances.gap_tol);
  read("residual_tol", cfg.tolerances.residual_tol);
  try {
    cfg.tolerances.validate();
  } catch (const Error& e) {
    bad.add(e.what());
  }
}

}  // namespace

std::vector<ZdscSetting> ZdscConfig::settings() const {
  std::vector<ZdscSetting> out;
  for (double tau : taus)
    for (const Vector& d : deltas) out.push_back({tau, d});
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

ProblemConfig parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("malformed problem document: ") + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::kParse, "problem document must be a JSON object");
  }

  ProblemConfig cfg;
  cfg.hash = fnv1a64(text);
  Collector bad;
  check_keys(doc, "document", {"A", "B", "distortion", "sim", "zdsc", "tolerances"}, bad);
  parse_tolerances(doc, cfg, bad);
  const auto a = matrix(doc, "A", bad);
  const auto b = matrix(doc, "B", bad);
  if (a && b) {
    cfg.A = *a;
    cfg.B = *b;
    for (auto& problem : model_violations(*a, *b, cfg.tolerances.eig_tol)) {
      bad.add(std::move(problem));
    }
  }
  parse_distortion(doc, cfg, bad);
  parse_sim(doc, cfg, bad);
  parse_zdsc(doc, a ? a->rows() : 0, cfg, bad);

  if (!bad.empty()) throw Error(ErrorKind::kValidation, bad.joined());
  cfg.model.emplace(cfg.A, cfg.B, cfg.tolerances);
  return cfg;
}

ProblemConfig load_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

}  // namespace immse
