#include "viscontact/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "viscontact/errors.hpp"

namespace viscontact {

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::elastic: return "elastic";
    case RunMode::viscoelastic: return "viscoelastic";
    case RunMode::both: return "both";
    case RunMode::lipschitz: return "lipschitz";
  }
  return "unknown";
}

RunMode parse_mode(std::string_view text, const std::string& key) {
  if (text == "elastic") return RunMode::elastic;
  if (text == "viscoelastic") return RunMode::viscoelastic;
  if (text == "both") return RunMode::both;
  if (text == "lipschitz") return RunMode::lipschitz;
  throw ValidationError(key + ": expected elastic, viscoelastic, both or lipschitz, got '" + std::string(text) + "'",
                        key);
}

const char* to_string(LoadShape shape) { return shape == LoadShape::sine ? "sin" : "constant"; }

double RunConfig::f2y(double t) const { return load_shape == LoadShape::sine ? amplitude * std::sin(t) : amplitude; }

namespace {

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ValidationError(key + ": " + what, key);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_real(std::string_view text, const std::string& key, int line) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    throw ParseError("line " + std::to_string(line) + ": " + key + " expects a number, got '" + std::string(text) + "'",
                     line);
  }
  return v;
}

long long to_integer(std::string_view text, const std::string& key, int line) {
  long long v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    throw ParseError(
        "line " + std::to_string(line) + ": " + key + " expects an integer, got '" + std::string(text) + "'", line);
  }
  return v;
}

bool to_bool(std::string_view text, const std::string& key, int line) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ParseError("line " + std::to_string(line) + ": " + key + " expects true or false", line);
}

int to_int(std::string_view text, const std::string& key, int line) {
  const long long v = to_integer(text, key, line);
  require(v >= -2147483647LL && v <= 2147483647LL, key, "out of range");
  return static_cast<int>(v);
}

}  // namespace

void RunConfig::validate() const {
  require(std::isfinite(young_E) && young_E > 0.0, "E", "must be positive");
  require(std::isfinite(poisson_kappa) && poisson_kappa > 0.0 && poisson_kappa < 0.5, "kappa",
          "must lie in (0, 0.5); the elasticity tensor is singular otherwise");
  require(std::isfinite(relaxation_b) && relaxation_b >= 0.0, "b", "must be nonnegative");
  require(std::isfinite(yield_F) && yield_F > 0.0, "F", "must be positive");
  require(std::isfinite(amplitude) && amplitude >= 0.0, "amplitude", "must be nonnegative");
  require(std::isfinite(T_end) && T_end > 0.0, "T", "must be positive");
  require(n_steps >= 1, "N", "must be at least 1");
  require(std::isfinite(h_interior) && h_interior > 0.0, "h_interior", "must be positive");
  require(std::isfinite(h_contact) && h_contact > 0.0, "h_contact", "must be positive");
  require(h_contact <= h_interior, "h_contact", "must not exceed h_interior");
  require(std::isfinite(opt_tol) && opt_tol > 0.0, "opt_tol", "must be positive");
  require(max_inner_iters >= 1, "max_inner_iters", "must be at least 1");
  require(restart_period >= 0, "restart_period", "must be nonnegative");
  require(vi_probes >= 0, "vi_probes", "must be nonnegative");
  require(sigma_probes >= 0, "sigma_probes", "must be nonnegative");
  require(candidate_probes >= 0, "candidate_probes", "must be nonnegative");
  require(candidate_steps >= 0, "candidate_steps", "must be nonnegative");
  require(std::isfinite(certificate_tol) && certificate_tol > 0.0, "certificate_tol", "must be positive");
  for (double t : snapshot_times) {
    require(std::isfinite(t) && t > 0.0 && t <= T_end * (1.0 + 1e-12), "snapshot_times", "times must lie in (0, T]");
  }
  require(!lipschitz_scales.empty(), "lipschitz_scales", "needs at least one scale");
  for (double s : lipschitz_scales) require(std::isfinite(s) && s > 0.0, "lipschitz_scales", "scales must be positive");
}

bool RunConfig::is_reference_setup() const {
  const RunConfig ref;
  return young_E == ref.young_E && poisson_kappa == ref.poisson_kappa && yield_F == ref.yield_F &&
         amplitude == ref.amplitude && load_shape == ref.load_shape && T_end == ref.T_end &&
         h_interior == ref.h_interior && h_contact == ref.h_contact;
}

std::vector<double> parse_real_list(std::string_view text, const std::string& key) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string_view item = trim(text.substr(pos, comma == std::string_view::npos ? text.size() - pos : comma - pos));
    require(!item.empty(), key, "empty list entry");
    double v = 0.0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    require(ec == std::errc() && end == item.data() + item.size(), key, "invalid number '" + std::string(item) + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  using Setter = std::function<void(std::string_view, const std::string&, int)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"E", [&](auto v, auto& k, int l) { cfg.young_E = to_real(v, k, l); }},
      {"kappa", [&](auto v, auto& k, int l) { cfg.poisson_kappa = to_real(v, k, l); }},
      {"b", [&](auto v, auto& k, int l) { cfg.relaxation_b = to_real(v, k, l); }},
      {"F", [&](auto v, auto& k, int l) { cfg.yield_F = to_real(v, k, l); }},
      {"amplitude", [&](auto v, auto& k, int l) { cfg.amplitude = to_real(v, k, l); }},
      {"load_shape",
       [&](auto v, auto& k, int) {
         if (v == "sin") {
           cfg.load_shape = LoadShape::sine;
         } else if (v == "constant") {
           cfg.load_shape = LoadShape::constant;
         } else {
           throw ValidationError(k + ": expected sin or constant", k);
         }
       }},
      {"T", [&](auto v, auto& k, int l) { cfg.T_end = to_real(v, k, l); }},
      {"N", [&](auto v, auto& k, int l) { cfg.n_steps = to_int(v, k, l); }},
      {"h_interior", [&](auto v, auto& k, int l) { cfg.h_interior = to_real(v, k, l); }},
      {"h_contact", [&](auto v, auto& k, int l) { cfg.h_contact = to_real(v, k, l); }},
      {"opt_tol", [&](auto v, auto& k, int l) { cfg.opt_tol = to_real(v, k, l); }},
      {"max_inner_iters", [&](auto v, auto& k, int l) { cfg.max_inner_iters = to_int(v, k, l); }},
      {"restart_period", [&](auto v, auto& k, int l) { cfg.restart_period = to_int(v, k, l); }},
      {"diagonal_scaling", [&](auto v, auto& k, int l) { cfg.diagonal_scaling = to_bool(v, k, l); }},
      {"vi_probes", [&](auto v, auto& k, int l) { cfg.vi_probes = to_int(v, k, l); }},
      {"sigma_probes", [&](auto v, auto& k, int l) { cfg.sigma_probes = to_int(v, k, l); }},
      {"candidate_probes", [&](auto v, auto& k, int l) { cfg.candidate_probes = to_int(v, k, l); }},
      {"candidate_steps", [&](auto v, auto& k, int l) { cfg.candidate_steps = to_int(v, k, l); }},
      {"certificate_tol", [&](auto v, auto& k, int l) { cfg.certificate_tol = to_real(v, k, l); }},
      {"seed",
       [&](auto v, auto& k, int l) {
         const long long s = to_integer(v, k, l);
         require(s >= 0, k, "must be nonnegative");
         cfg.seed = static_cast<std::uint64_t>(s);
       }},
      {"mode", [&](auto v, auto& k, int) { cfg.mode = parse_mode(v, k); }},
      {"snapshot_times", [&](auto v, auto& k, int) { cfg.snapshot_times = parse_real_list(v, k); }},
      {"lipschitz_scales", [&](auto v, auto& k, int) { cfg.lipschitz_scales = parse_real_list(v, k); }},
      {"output_dir", [&](auto v, auto&, int) { cfg.output_dir = std::string(v); }},
  };

  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    ++line_no;
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'", line_no);
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("line " + std::to_string(line_no) + ": missing key", line_no);
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key + "'", line_no);
    }
    if (!seen.insert(key).second) {
      throw ParseError("line " + std::to_string(line_no) + ": repeated key '" + key + "'", line_no);
    }
    it->second(value, key, line_no);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open configuration file " + path.string(), 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace viscontact
