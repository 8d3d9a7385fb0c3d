#include "pctnpi/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "pctnpi/errors.hpp"

namespace pctnpi::cli {
namespace {

class Parser {
 public:
  explicit Parser(std::filesystem::path source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const int line = at.Mark().line >= 0 ? at.Mark().line + 1 : 0;
    throw ConfigError(fmt::format("{}:{}: {}", source_.string(), line, msg));
  }

  void only_keys(const YAML::Node& map, const std::string& where, std::initializer_list<const char*> allowed) const {
    if (!map.IsMap()) fail(map, where + " must be a mapping");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) fail(kv.first, fmt::format("unknown key '{}' in {}", key, where));
    }
  }

  YAML::Node need(const YAML::Node& map, const char* key, const std::string& where) const {
    const YAML::Node n = map[key];
    if (!n) fail(map, fmt::format("{} is missing '{}'", where, key));
    return n;
  }

  double number(const YAML::Node& n, const std::string& what) const {
    try {
      return n.as<double>();
    } catch (const YAML::Exception&) {
      fail(n, what + " must be a number");
    }
  }

  int integer(const YAML::Node& n, const std::string& what) const {
    try {
      return n.as<int>();
    } catch (const YAML::Exception&) {
      fail(n, what + " must be an integer");
    }
  }

  std::string text(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + " must be a string");
    return n.as<std::string>();
  }

  double positive(const YAML::Node& map, const char* key, const std::string& where) const {
    const YAML::Node n = need(map, key, where);
    const double v = number(n, where + "." + key);
    if (!(v > 0.0)) fail(n, fmt::format("{}.{} must be positive", where, key));
    return v;
  }

  double nonnegative(const YAML::Node& map, const char* key, const std::string& where) const {
    const YAML::Node n = need(map, key, where);
    const double v = number(n, where + "." + key);
    if (!(v >= 0.0) || std::isinf(v)) fail(n, fmt::format("{}.{} must be finite and non-negative", where, key));
    return v;
  }

  SystemSpec system(const YAML::Node& n) const {
    const auto kind = text(need(n, "kind", "system"), "system.kind");
    if (kind == "tls") {
      only_keys(n, "system", {"kind", "epsilon", "omega"});
      return SystemSpec::tls(number(need(n, "epsilon", "system"), "system.epsilon"),
                             number(need(n, "omega", "system"), "system.omega"));
    }
    if (kind == "wire") {
      only_keys(n, "system", {"kind", "site_energies", "coupling"});
      const YAML::Node e = need(n, "site_energies", "system");
      if (!e.IsSequence() || e.size() < 2) fail(e, "system.site_energies must list at least two sites");
      std::vector<double> energies;
      for (const auto& x : e) energies.push_back(number(x, "system.site_energies entry"));
      return SystemSpec::wire(std::move(energies), number(need(n, "coupling", "system"), "system.coupling"));
    }
    fail(n["kind"], "system.kind must be 'tls' or 'wire', got '" + kind + "'");
  }

  SpectralDensity spectral_density(const YAML::Node& n) const {
    const auto form = text(need(n, "spectral_density", "bath"), "bath.spectral_density");
    if (form == "ohmic_exponential") {
      only_keys(n, "bath", {"spectral_density", "xi", "omega_c", "beta"});
      return SpectralDensity::ohmic_exponential(nonnegative(n, "xi", "bath"), positive(n, "omega_c", "bath"));
    }
    if (form == "drude") {
      only_keys(n, "bath", {"spectral_density", "kappa", "omega_c", "beta"});
      return SpectralDensity::drude(nonnegative(n, "kappa", "bath"), positive(n, "omega_c", "bath"));
    }
    if (form == "tabulated") {
      only_keys(n, "bath", {"spectral_density", "table", "beta"});
      const YAML::Node t = need(n, "table", "bath");
      std::filesystem::path p = text(t, "bath.table");
      if (p.is_relative()) p = source_.parent_path() / p;
      try {
        return SpectralDensity::load_table(p);
      } catch (const Error& e) {
        fail(t, e.what());
      }
    }
    fail(n["spectral_density"],
         "bath.spectral_density must be 'ohmic_exponential', 'drude' or 'tabulated', got '" + form + "'");
  }

  Mode mode(const YAML::Node& n) const {
    const auto m = text(n, "mode");
    if (m == "full") return Mode::full;
    if (m == "classical") return Mode::classical;
    fail(n, "mode must be 'full' or 'classical', got '" + m + "'");
  }

  int memory(const YAML::Node& n, int steps) const {
    if (n.IsScalar() && n.as<std::string>() == "full") return 0;
    const int l = integer(n, "memory");
    if (l < 1 || l > steps) fail(n, fmt::format("memory must lie in [1, steps = {}], got {}", steps, l));
    return l == steps ? 0 : l;
  }

  std::vector<RunSpec> runs(const YAML::Node& d, int steps) const {
    std::vector<RunSpec> out;
    if (const YAML::Node r = d["runs"]) {
      if (d["memory"] || d["mode"]) fail(r, "use either 'runs' or 'memory'/'mode', not both");
      if (!r.IsSequence() || r.size() == 0) fail(r, "runs must be a non-empty list");
      for (const auto& item : r) {
        only_keys(item, "runs entry", {"memory", "mode"});
        out.push_back({memory(need(item, "memory", "runs entry"), steps),
                       item["mode"] ? mode(item["mode"]) : Mode::full});
      }
      return out;
    }
    std::vector<int> ls;
    if (const YAML::Node m = d["memory"]) {
      if (m.IsSequence()) {
        if (m.size() == 0) fail(m, "memory list is empty");
        for (const auto& x : m) ls.push_back(memory(x, steps));
      } else {
        ls.push_back(memory(m, steps));
      }
    } else {
      ls.push_back(0);
    }
    std::vector<Mode> ms;
    if (const YAML::Node m = d["mode"]) {
      if (m.IsSequence()) {
        for (const auto& x : m) ms.push_back(mode(x));
      } else {
        ms.push_back(mode(m));
      }
    } else {
      ms.push_back(Mode::full);
    }
    for (Mode m : ms) {
      for (int l : ls) out.push_back({l, m});
    }
    return out;
  }

  CMatrix initial_state(const YAML::Node& n, std::size_t d, std::vector<std::string>& warnings) const {
    CMatrix rho = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    if (n.IsScalar()) {
      std::istringstream in(n.as<std::string>());
      std::string word;
      long k = 0;
      if (!(in >> word >> k) || word != "site" || !(in >> std::ws).eof()) {
        fail(n, "initial_state must be 'site k' or a matrix");
      }
      if (k < 1 || static_cast<std::size_t>(k) > d) fail(n, fmt::format("site {} outside 1..{}", k, d));
      rho(k - 1, k - 1) = 1.0;
      return rho;
    }
    if (!n.IsSequence() || n.size() != d) fail(n, fmt::format("initial_state must have {} rows", d));
    for (std::size_t a = 0; a < d; ++a) {
      const YAML::Node row = n[a];
      if (!row.IsSequence() || row.size() != d) fail(row, fmt::format("initial_state row {} must have {} entries", a + 1, d));
      for (std::size_t b = 0; b < d; ++b) {
        const YAML::Node x = row[b];
        cplx v;
        if (x.IsSequence()) {
          if (x.size() != 2) fail(x, "complex entries are written [re, im]");
          v = {number(x[0], "initial_state entry"), number(x[1], "initial_state entry")};
        } else {
          v = number(x, "initial_state entry");
        }
        rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      }
    }
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12) fail(n, "initial_state must be Hermitian");
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) >= 1e-6) fail(n, fmt::format("initial_state has trace {:.17g}, expected 1", tr));
    if (tr != 1.0) {
      warnings.push_back(fmt::format("{}:{}: initial_state trace {:.17g} renormalized to 1", source_.string(),
                                     n.Mark().line + 1, tr));
      rho /= tr;
    }
    return rho;
  }

  RunConfig parse(const std::string& body) const {
    YAML::Node root;
    try {
      root = YAML::Load(body);
    } catch (const YAML::ParserException& e) {
      throw ConfigError(fmt::format("{}:{}: {}", source_.string(), e.mark.line + 1, e.msg));
    }
    if (!root.IsMap()) throw ConfigError(source_.string() + ":1: configuration must be a mapping");
    only_keys(root, "configuration", {"system", "bath", "discretization", "initial_state", "output"});

    RunConfig cfg;
    cfg.source = source_;
    cfg.name = source_.stem().string();
    if (const YAML::Node o = root["output"]) {
      only_keys(o, "output", {"name", "format"});
      if (o["name"]) cfg.name = text(o["name"], "output.name");
      if (o["format"] && text(o["format"], "output.format") != "csv") fail(o["format"], "output.format must be 'csv'");
    }
    if (cfg.name.empty() || cfg.name.find('/') != std::string::npos) fail(root, "output name must be a plain file stem");

    try {
      cfg.system = system(need(root, "system", "configuration"));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail(root["system"], e.what());
    }

    const YAML::Node bath = need(root, "bath", "configuration");
    try {
      cfg.spectral_density = spectral_density(bath);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail(bath, e.what());
    }
    cfg.bath.beta = positive(bath, "beta", "bath");

    const YAML::Node d = need(root, "discretization", "configuration");
    only_keys(d, "discretization", {"dt", "steps", "memory", "mode", "runs", "endpoint_policy", "quadrature_tol"});
    cfg.bath.dt = positive(d, "dt", "discretization");
    const YAML::Node steps = need(d, "steps", "discretization");
    cfg.steps = integer(steps, "discretization.steps");
    if (cfg.steps < 1) fail(steps, "discretization.steps must be at least 1");
    if (const YAML::Node p = d["endpoint_policy"]) {
      const auto v = text(p, "discretization.endpoint_policy");
      if (v == "stationary") {
        cfg.bath.endpoint_policy = EndpointPolicy::stationary;
      } else if (v == "classic") {
        cfg.bath.endpoint_policy = EndpointPolicy::classic;
      } else {
        fail(p, "endpoint_policy must be 'stationary' or 'classic', got '" + v + "'");
      }
    }
    if (d["quadrature_tol"]) cfg.bath.quadrature_tol = positive(d, "quadrature_tol", "discretization");
    cfg.runs = runs(d, cfg.steps);
    if (cfg.bath.endpoint_policy == EndpointPolicy::classic) {
      for (const auto& r : cfg.runs) {
        if (r.L != 0) fail(d, "the classic endpoint policy only supports memory: full");
      }
    }

    cfg.rho0 = initial_state(need(root, "initial_state", "configuration"), cfg.system.dim(), cfg.warnings);
    return cfg;
  }

 private:
  std::filesystem::path source_;
};

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& source) {
  return Parser(source).parse(text);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open configuration file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

const char* mode_name(Mode mode) noexcept { return mode == Mode::full ? "full" : "classical"; }

}  // namespace pctnpi::cli
