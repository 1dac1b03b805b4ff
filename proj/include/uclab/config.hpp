#pragma once

// Run configuration: JSON schema 1, parsed with field-path diagnostics.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uclab/error.hpp"
#include "uclab/geometry.hpp"

namespace uclab {

using Json = nlohmann::json;

inline const std::set<std::string>& known_commands() {
  static const std::set<std::string> c{"verify-identity", "verify-carleman", "verify-nl", "limits",
                                       "counterexample",  "solve",           "pipeline",  "battery"};
  return c;
}

struct GridConfig {
  double rho = 0.1, omega = 10.0, sigma = 0.1, tau = 10.0;
  int ns = 129, ny = 129;
  int ell = 0;
  int fd_order = 4;
  AdmissibleRegion region() const { return {rho, omega, sigma, tau}; }
};

/// kind: zero | constant | psi_one | bump | dalembert | multipole | counterexample | solver
struct FieldConfig {
  std::string kind = "zero";
  double value = 1.0;                        // constant
  double s0 = 0.0, y0 = 0.3, width = 1.0;    // bump: exp(-((s - s0)^2 + (y - y0)^2) / width^2)
  bool randomize = false;                    // bump centre drawn from the seed
  double center = 3.0, amplitude = 1.0;      // dalembert / solver profile
  double profile_width = 1.0;
  std::string profile = "gaussian";          // gaussian | bump (compact)
  double a = 6.0;                            // counterexample
  double k = 2.5;                            // counterexample: requested decay order
};

/// kind: power_log | split_low | split_high
struct WeightConfig {
  std::string kind = "power_log";
  double a = 1.0, b = 0.1, p = 0.5;
};

/// kind: constant | power_f (V = value f^c)
struct PotentialConfig {
  std::string kind = "constant";
  double value = 1.0;
  double c = 0.0;
};

/// kind: zero | power
struct NonlinearityConfig {
  std::string kind = "zero";
  int sign = 1;
  double p = 1.0;
  PotentialConfig V;
};

struct LimitsConfig {
  double delta = 1.0, alpha = 0.5, beta = 0.5;
  double tau0 = 1024.0, sigma0 = 1.0 / 1024.0, rho0 = 1e-2, omega0 = 2.0;
  double f_lo = 1.0, f_hi = 4.0;  // cone sequences integrate over this f-range
  double ratio = 2.0;
  int count = 6;
  int fit_points = 4;
  double relative_tolerance = 0.10;
  int nodes = 64, panels = 64;
};

struct PipelineConfig {
  std::string mode = "linear";  // linear | nonlinear
  double beta = 3.0, p = 1.0;
  double a = 0.1;               // nonlinear weight exponent
  std::string expect;           // optional expected named term, e.g. "I1"
};

struct SolveConfig {
  double dr = 0.02;
  int levels = 3;
  double order_lo = 1.7, order_hi = 2.3;
};

struct RunConfig {
  int schema = 1;
  std::string command = "verify-identity";
  int n = 3;
  GridConfig grid;
  FieldConfig field;
  WeightConfig weight;
  NonlinearityConfig nonlinearity;
  LimitsConfig limits;
  PipelineConfig pipeline;
  SolveConfig solve;
  std::vector<int> refine{1, 2, 4};
  std::uint64_t seed = 0;
  std::string out_dir = "uclab-out";
  std::string format = "json";
  Json raw;  // echo of the parsed document
};

namespace detail {

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <class T>
  void get(const char* key, T& out) const {
    if (!j_.contains(key)) return;
    const Json& v = j_.at(key);
    const std::string p = where(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail(p, "expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) fail(p, "expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) fail(p, "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) fail(p, "expected a string");
      }
      out = v.get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail(p, e.what());
    }
  }

  std::optional<Reader> sub(const char* key) const {
    if (!j_.contains(key)) return std::nullopt;
    return Reader(j_.at(key), where(key));
  }

  void only(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) fail(where(it.key().c_str()), "unknown key");
  }

  std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::config_error, path + ": " + what);
  }

  const Json& json() const { return j_; }

 private:
  const Json& j_;
  std::string path_;
};

inline void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) Reader::fail(path, what);
}

inline void check_one_of(const std::string& v, std::initializer_list<const char*> options, const std::string& path) {
  for (const char* o : options)
    if (v == o) return;
  std::string list;
  for (const char* o : options) list += (list.empty() ? "" : ", ") + std::string(o);
  Reader::fail(path, "'" + v + "' is not one of {" + list + "}");
}

}  // namespace detail

/// Parses and validates a configuration document; throws Error(config_error) naming the field.
inline RunConfig parse_config(const Json& doc) {
  using detail::check;
  using detail::Reader;
  RunConfig c;
  c.raw = doc;
  const Reader r(doc, "");
  r.only({"schema", "command", "n", "grid", "field", "weight", "nonlinearity", "limits", "pipeline", "solve", "refine",
          "seed", "output"});
  check(doc.contains("schema"), "schema", "missing (expected 1)");
  r.get("schema", c.schema);
  check(c.schema == 1, "schema", "unsupported schema version " + std::to_string(c.schema));
  r.get("command", c.command);
  check(known_commands().count(c.command) == 1, "command", "unknown command '" + c.command + "'");
  r.get("n", c.n);
  check(c.n >= 2, "n", "dimension must be >= 2");

  if (auto g = r.sub("grid")) {
    g->only({"rho", "omega", "sigma", "tau", "ns", "ny", "ell", "fd_order"});
    g->get("rho", c.grid.rho), g->get("omega", c.grid.omega), g->get("sigma", c.grid.sigma);
    g->get("tau", c.grid.tau), g->get("ns", c.grid.ns), g->get("ny", c.grid.ny);
    g->get("ell", c.grid.ell), g->get("fd_order", c.grid.fd_order);
  }
  check(c.grid.rho > 0.0, "grid.rho", "must be positive");
  check(c.grid.rho < c.grid.omega, "grid.omega", "requires rho < omega");
  check(c.grid.sigma > 0.0, "grid.sigma", "must be positive");
  check(c.grid.sigma < c.grid.tau, "grid.tau", "requires sigma < tau");
  check(c.grid.ns >= 8, "grid.ns", "at least 8 nodes");
  check(c.grid.ny >= 8, "grid.ny", "at least 8 nodes");
  check(c.grid.ell >= 0, "grid.ell", "must be >= 0");
  check(c.grid.fd_order == 2 || c.grid.fd_order == 4, "grid.fd_order", "must be 2 or 4");

  if (auto f = r.sub("field")) {
    f->only({"kind", "value", "s0", "y0", "width", "randomize", "center", "amplitude", "profile_width", "profile", "a",
             "k"});
    f->get("kind", c.field.kind), f->get("value", c.field.value), f->get("s0", c.field.s0);
    f->get("y0", c.field.y0), f->get("width", c.field.width), f->get("randomize", c.field.randomize);
    f->get("center", c.field.center), f->get("amplitude", c.field.amplitude);
    f->get("profile_width", c.field.profile_width), f->get("profile", c.field.profile);
    f->get("a", c.field.a), f->get("k", c.field.k);
  }
  detail::check_one_of(c.field.kind,
                       {"zero", "constant", "psi_one", "bump", "dalembert", "multipole", "counterexample", "solver"},
                       "field.kind");
  detail::check_one_of(c.field.profile, {"gaussian", "bump"}, "field.profile");
  check(c.field.width > 0.0, "field.width", "must be positive");
  check(c.field.profile_width > 0.0, "field.profile_width", "must be positive");
  check(c.field.a > 0.0, "field.a", "must be positive");

  if (auto w = r.sub("weight")) {
    w->only({"kind", "a", "b", "p"});
    w->get("kind", c.weight.kind), w->get("a", c.weight.a), w->get("b", c.weight.b), w->get("p", c.weight.p);
  }
  detail::check_one_of(c.weight.kind, {"power_log", "split_low", "split_high"}, "weight.kind");
  check(c.weight.a > 0.0, "weight.a", "must be positive");

  if (auto u = r.sub("nonlinearity")) {
    u->only({"kind", "sign", "p", "V"});
    u->get("kind", c.nonlinearity.kind), u->get("sign", c.nonlinearity.sign), u->get("p", c.nonlinearity.p);
    if (auto v = u->sub("V")) {
      v->only({"kind", "value", "c"});
      v->get("kind", c.nonlinearity.V.kind), v->get("value", c.nonlinearity.V.value), v->get("c", c.nonlinearity.V.c);
    }
  }
  detail::check_one_of(c.nonlinearity.kind, {"zero", "power"}, "nonlinearity.kind");
  detail::check_one_of(c.nonlinearity.V.kind, {"constant", "power_f"}, "nonlinearity.V.kind");
  check(c.nonlinearity.sign == 1 || c.nonlinearity.sign == -1, "nonlinearity.sign", "must be +1 or -1");
  check(c.nonlinearity.p >= 1.0, "nonlinearity.p", "must be >= 1");
  check(c.nonlinearity.V.value > 0.0, "nonlinearity.V.value", "must be positive");

  if (auto l = r.sub("limits")) {
    l->only({"delta", "alpha", "beta", "tau0", "sigma0", "rho0", "omega0", "f_lo", "f_hi", "ratio", "count",
             "fit_points", "relative_tolerance", "nodes", "panels"});
    auto& L = c.limits;
    l->get("delta", L.delta), l->get("alpha", L.alpha), l->get("beta", L.beta), l->get("tau0", L.tau0);
    l->get("sigma0", L.sigma0), l->get("rho0", L.rho0), l->get("omega0", L.omega0), l->get("f_lo", L.f_lo);
    l->get("f_hi", L.f_hi), l->get("ratio", L.ratio), l->get("count", L.count), l->get("fit_points", L.fit_points);
    l->get("relative_tolerance", L.relative_tolerance), l->get("nodes", L.nodes), l->get("panels", L.panels);
  }
  check(c.limits.ratio > 1.0, "limits.ratio", "must exceed 1");
  check(c.limits.count >= 4, "limits.count", "at least 4");
  check(c.limits.fit_points >= 2 && c.limits.fit_points <= c.limits.count, "limits.fit_points", "between 2 and count");
  check(c.limits.f_lo > 0.0 && c.limits.f_lo < c.limits.f_hi, "limits.f_hi", "requires 0 < f_lo < f_hi");
  check(c.limits.nodes >= 16, "limits.nodes", "at least 16");
  check(c.limits.panels >= 1, "limits.panels", "at least 1");

  if (auto p = r.sub("pipeline")) {
    p->only({"mode", "beta", "p", "a", "expect"});
    p->get("mode", c.pipeline.mode), p->get("beta", c.pipeline.beta), p->get("p", c.pipeline.p);
    p->get("a", c.pipeline.a), p->get("expect", c.pipeline.expect);
  }
  detail::check_one_of(c.pipeline.mode, {"linear", "nonlinear"}, "pipeline.mode");
  check(c.pipeline.p > 0.0 && c.pipeline.p < c.pipeline.beta, "pipeline.p", "requires 0 < p < beta");

  if (auto s = r.sub("solve")) {
    s->only({"dr", "levels", "order_lo", "order_hi"});
    s->get("dr", c.solve.dr), s->get("levels", c.solve.levels), s->get("order_lo", c.solve.order_lo);
    s->get("order_hi", c.solve.order_hi);
  }
  check(c.solve.dr > 0.0, "solve.dr", "must be positive");
  check(c.solve.levels >= 2, "solve.levels", "at least 2");

  if (doc.contains("refine")) {
    const Json& rf = doc.at("refine");
    check(rf.is_array() && !rf.empty(), "refine", "expected a non-empty array of refinement factors");
    c.refine.clear();
    for (std::size_t i = 0; i < rf.size(); ++i) {
      const std::string p = "refine[" + std::to_string(i) + "]";
      check(rf[i].is_number_integer() && rf[i].get<int>() >= 1, p, "expected an integer >= 1");
      c.refine.push_back(rf[i].get<int>());
    }
  }
  r.get("seed", c.seed);
  if (auto o = r.sub("output")) {
    o->only({"dir", "format"});
    o->get("dir", c.out_dir), o->get("format", c.format);
  }
  detail::check_one_of(c.format, {"json", "csv-bundle"}, "output.format");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, path + ": cannot open");
  Json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::config_error, path + ": " + e.what());
  }
  return parse_config(doc);
}

/// Refinement factors {1, 2, 4, ...} for a level count.
inline std::vector<int> refinement_levels(int levels) {
  require(levels >= 1, ErrorCode::config_error, "refine: at least one level");
  std::vector<int> out;
  for (int k = 0; k < levels; ++k) out.push_back(1 << k);
  return out;
}

}  // namespace uclab
