// Command-line front end.  Exit status: 0 success, 1 usage, 2 invalid input
// or failed verification, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "carleman.hpp"

using namespace carleman;
using json = nlohmann::json;
constexpr double pi = std::numbers::pi;

namespace {

// --config file.json: top-level keys are option names of the main app,
// nested objects are sections for the subcommand of that name.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    throw CLI::ConfigError("writing JSON configuration is not supported");
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw CLI::ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConfigError("configuration must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
      return buf;
    }
    throw CLI::ConfigError("unsupported configuration value " + v.dump());
  }

  static void collect(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, v] : j.items()) {
      if (v.is_object()) {
        auto p = parents;
        p.push_back(key);
        collect(v, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (v.is_array()) {
        std::string joined;
        for (const auto& e : v) joined += (joined.empty() ? "" : ",") + scalar(e);
        item.inputs = {joined};
      } else {
        item.inputs = {scalar(v)};
      }
      out.push_back(item);
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : "nan"; }

json pair(cplx z) { return json::array({z.real(), z.imag()}); }

// "a:b:step" or a comma separated list
std::vector<double> parse_grid(const std::string& s, const char* name) {
  std::vector<double> g;
  auto fail = [&] { throw validation_error(std::string(name) + ": expected a:b:step or a comma list, got '" + s + "'"); };
  if (s.find(':') != std::string::npos) {
    double a = 0, b = 0, h = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(s);
    if (!(in >> a >> c1 >> b >> c2 >> h) || c1 != ':' || c2 != ':' || !in.eof()) fail();
    if (!(h > 0) || !(b >= a)) throw validation_error(std::string(name) + ": need step > 0 and b >= a");
    const long m = std::lround(std::floor((b - a) / h + 1e-9));
    for (long i = 0; i <= m; ++i) g.push_back(a + h * double(i));
  } else {
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        std::size_t used = 0;
        g.push_back(std::stod(item, &used));
        if (used != item.size()) fail();
      } catch (const std::logic_error&) {
        fail();
      }
    }
  }
  if (g.empty()) fail();
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw validation_error(std::string(name) + ": grid must be strictly increasing");
  return g;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw validation_error("cannot open " + path + " for writing");
  }
  std::ostream& operator()() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// ---- shared options

struct SymbolOptions {
  std::vector<double> p, q;
  int n = -1;
  std::string family = "cosh";
  double alpha = 1.0, beta = 0.5;
  std::string emit = "-";

  void add(CLI::App* app, bool with_symbol = true) {
    if (with_symbol) {
      app->add_option("--p", p, "Coefficients p_0,...,p_n of P (monic)")->delimiter(',');
      app->add_option("--q", q, "Coefficients q_0,...,q_n of the symbol Q (monic)")->delimiter(',');
    }
    app->add_option("--n", n, "Order; with no polynomial given, P = X^n");
    app->add_option("--family", family, "Weight profile: cosh, power, stretched")->capture_default_str();
    app->add_option("--alpha", alpha, "Profile exponent alpha")->capture_default_str();
    app->add_option("--beta", beta, "Stretched-exponential scale beta")->capture_default_str();
    app->add_option("--emit", emit, "Output file ('-' for stdout)")->capture_default_str();
  }

  RealPolynomial symbol() const {
    if (!p.empty() && !q.empty()) throw validation_error("give exactly one of --p and --q");
    RealPolynomial Q;
    if (!q.empty()) {
      Q = RealPolynomial(q);
    } else if (!p.empty()) {
      Q = p_to_q(RealPolynomial(p));
    } else {
      if (n < 0) throw validation_error("give --p, --q or --n");
      std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
      c.back() = 1.0;
      Q = p_to_q(RealPolynomial(c));
    }
    if (n >= 0 && Q.degree() != n) throw validation_error("--n does not match the polynomial degree");
    return Q;
  }

  WeightProfile profile() const {
    if (family == "cosh") return WeightProfile::hankel();
    if (family == "power" || family == "power_law") return WeightProfile::power_law(alpha);
    if (family == "stretched" || family == "stretched_exp") return WeightProfile::stretched_exp(alpha, beta);
    throw validation_error("unknown profile family '" + family + "'");
  }

  std::shared_ptr<const OperatorCoefficients> op() const {
    return std::make_shared<const OperatorCoefficients>(symbol(), profile());
  }

  json describe() const {
    const WeightProfile v = profile();
    return {{"family", to_string(v.family())}, {"alpha", v.alpha()}, {"beta", v.beta()}, {"q", symbol().coeffs}};
  }

  std::string comment() const {
    const WeightProfile v = profile();
    std::string s = "# family=" + to_string(v.family()) + " alpha=" + num(v.alpha()) + " beta=" + num(v.beta()) + " q=";
    const RealPolynomial Q = symbol();
    for (std::size_t i = 0; i < Q.coeffs.size(); ++i) s += (i ? "," : "") + num(Q.coeffs[i]);
    return s;
  }
};

struct SolverFlags {
  double X = 1e4;
  SolverOptions so;

  void add(CLI::App* app, double X_default) {
    X = X_default;
    app->add_option("--X", X, "Truncation radius")->capture_default_str();
    app->add_option("--h-min", so.mesh.h_min, "Panel length at the origin")->capture_default_str();
    app->add_option("--h-max", so.mesh.h_max, "Largest panel length")->capture_default_str();
    app->add_option("--growth", so.mesh.growth, "Panel growth factor")->capture_default_str();
    app->add_option("--gmres-tol", so.gmres_tol, "GMRES relative tolerance")->capture_default_str();
    app->add_option("--gmres-restart", so.gmres_restart, "GMRES restart length")->capture_default_str();
    app->add_option("--gmres-max-iter", so.gmres_max_iter, "GMRES iteration cap")->capture_default_str();
  }

  void check() const {
    if (!(X > 0) || !(so.mesh.h_min > 0) || !(so.mesh.h_max >= so.mesh.h_min) || !(so.mesh.growth >= 1) ||
        !(so.gmres_tol > 0) || so.gmres_restart < 1 || so.gmres_max_iter < 1)
      throw validation_error("solver settings must be positive with h_max >= h_min and growth >= 1");
  }

  json describe() const {
    return {{"X", X},
            {"h_min", so.mesh.h_min},
            {"h_max", so.mesh.h_max},
            {"growth", so.mesh.growth},
            {"gmres_tol", so.gmres_tol},
            {"gmres_restart", so.gmres_restart},
            {"gmres_max_iter", so.gmres_max_iter}};
  }

  std::string comment() const {
    return "# X=" + num(X) + " h_min=" + num(so.mesh.h_min) + " h_max=" + num(so.mesh.h_max) + " growth=" +
           num(so.mesh.growth) + " gmres_tol=" + num(so.gmres_tol);
  }
};

// ---- subcommands

void map_coeffs(const SymbolOptions& o) {
  if (o.p.empty() == o.q.empty()) throw validation_error("map-coeffs: give exactly one of --p and --q");
  json j;
  if (!o.p.empty()) j["q"] = p_to_q(RealPolynomial(o.p)).coeffs;
  else j["p"] = q_to_p(RealPolynomial(o.q)).coeffs;
  Output out(o.emit);
  out() << j.dump() << "\n";
}

void profile(const SymbolOptions& o, const std::string& grid) {
  if (o.n < 1) throw validation_error("profile: --n >= 1 required");
  const WeightProfile v = o.profile();
  const ChangeOfVariables cov(v, o.n);
  Output out(o.emit);
  out() << "# family=" << to_string(v.family()) << " alpha=" << num(v.alpha()) << " beta=" << num(v.beta())
        << " n=" << o.n << "\n";
  out() << "xi,v,x\n";
  for (double xi : parse_grid(grid, "--xi-grid")) out() << num(xi) << "," << num(v(xi)) << "," << num(cov.x_of_xi(xi)) << "\n";
}

void transform(const SymbolOptions& o, const std::string& grid) {
  const auto op = o.op();
  const int n = op->n();
  Output out(o.emit);
  out() << o.comment() << "\n";
  out() << "x";
  for (const char* tag : {"b", "bt"})
    for (int m = 0; m <= n; ++m) out() << ",re_" << tag << m << ",im_" << tag << m;
  out() << ",beta\n";
  for (double x : parse_grid(grid, "--x-grid")) {
    out() << num(x);
    for (const auto& b : {op->b(x), op->b_tilde(x)})
      for (const cplx& z : b) out() << "," << num(z.real()) << "," << num(z.imag());
    out() << "," << num(op->beta(x)) << "\n";
  }
}

void scatter(const SymbolOptions& o, const SolverFlags& s, double lo, double hi, int points, bool extrapolate) {
  s.check();
  if (points < 1) throw validation_error("scatter: --points must be >= 1");
  if (points > 1 && !(hi > lo)) throw validation_error("scatter: need lambda-max > lambda-min");
  const auto op = o.op();
  ScatteringSolver solver(gauged_field(op), s.so);
  json records = json::array();
  for (int i = 0; i < points; ++i) {
    const double lambda = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
    json r;
    ScatteringEntry e;
    if (extrapolate) {
      const ScatteringRecord rec = scattering_matrix(solver, lambda, s.X);
      e = rec.at_X;
      r["S_extrapolated"] = {{"s11", pair(rec.S_extrapolated(0, 0))}, {"s12", pair(rec.S_extrapolated(0, 1))},
                             {"s21", pair(rec.S_extrapolated(1, 0))}, {"s22", pair(rec.S_extrapolated(1, 1))}};
      r["truncation_estimate"] = rec.truncation_estimate;
    } else {
      e = solver.entry(lambda, s.X);
    }
    r["lambda"] = lambda;
    r["entries"] = {{"s11", pair(e.S(0, 0))}, {"s12", pair(e.S(0, 1))}, {"s21", pair(e.S(1, 0))}, {"s22", pair(e.S(1, 1))}};
    r["unitarity_defect"] = e.unitarity_defect;
    r["reciprocity_defect"] = e.reciprocity_defect();
    r["truncation_X"] = e.truncation_X;
    r["gmres_tol"] = s.so.gmres_tol;
    r["mesh_nodes"] = e.mesh_nodes;
    r["iterations"] = e.iterations;
    records.push_back(r);
  }
  json j = o.describe();
  j["n"] = op->n();
  j["solver"] = s.describe();
  j["records"] = records;
  Output out(o.emit);
  out() << j.dump(1) << "\n";
}

void longrange(const SymbolOptions& o, int j, double k, const std::string& grid, bool gauged) {
  if (j < 1) throw validation_error("longrange: --j must be >= 1");
  const auto op = o.op();
  const PhaseIteration it(op, gauged);
  Output out(o.emit);
  out() << o.comment() << " k=" << num(k) << " gauged=" << (gauged ? 1 : 0) << "\n";
  out() << "x";
  for (int i = 1; i <= j; ++i) out() << ",re_sigma" << i << ",im_sigma" << i;
  out() << ",re_theta" << j << ",im_theta" << j << ",abs_residual" << j << "\n";
  for (double x : parse_grid(grid, "--x-grid")) {
    const std::vector<cplx> s = it.sigmas(j, x, k);
    out() << num(x);
    for (int i = 1; i <= j; ++i) out() << "," << num(s[static_cast<std::size_t>(i)].real()) << "," << num(s[static_cast<std::size_t>(i)].imag());
    const cplx th = it.theta(j, x, k);
    out() << "," << num(th.real()) << "," << num(th.imag()) << "," << num(std::abs(it.residual(j, x, k))) << "\n";
  }
}

void hankel_theta(const SymbolOptions& o, const SolverFlags& s, double k, const std::string& grid, ThetaOptions to) {
  s.check();
  const auto op = o.op();
  const std::vector<double> Ns = parse_grid(grid, "--N-grid");
  for (double N : Ns)
    if (std::abs(N) > to.N_max) throw validation_error("hankel-theta: |N| exceeds --N-max");
  ScatteringSolver solver(gauged_field(op), s.so);
  const ScatteringEntry e = solver.entry(std::copysign(std::pow(std::abs(k), op->n()), op->n() % 2 ? k : 1.0), s.X);
  const HankelEigenfunction h(op, solver.field(k, s.X), to);
  const PhaseModel m(*op, k);
  Output out(o.emit);
  out() << o.comment() << " k=" << num(k) << "\n";
  out() << s.comment() << " core_radius=" << num(h.core_radius()) << " window=" << num(h.window())
        << " N_max=" << num(to.N_max) << "\n";
  out() << "N,re_theta,im_theta,re_theta_asym,im_theta_asym,residual\n";
  for (const ThetaValue& v : h.evaluate(Ns)) {
    const cplx a = theta_asymptotic(v.N, m, e.S);
    out() << num(v.N) << "," << num(v.Theta.real()) << "," << num(v.Theta.imag()) << "," << num(a.real()) << ","
          << num(a.imag()) << "," << num(std::abs(v.Theta - a) / std::max(1.0, std::abs(a))) << "\n";
  }
}

StationaryPhaseProblem statphase_case(const std::string& name, double a) {
  if (!(a > 0)) throw validation_error("statphase: --a must be positive");
  StationaryPhaseProblem p;
  p.omega = [](double y) { return y * y; };
  p.d1omega = [](double y) { return 2 * y; };
  p.d2omega = [](double) { return 2.0; };
  p.d3omega = [](double) { return 0.0; };
  p.a = a;
  if (name == "fresnel") p.g = [a](double y) { return cutoff(y, a); };
  else if (name == "bump") p.g = [a](double y) { return std::exp(-y) * cutoff(y, a); };
  else if (name == "gaussian") p.g = [a](double y) { return std::exp(-y * y) * cutoff(y, a); };
  else throw validation_error("statphase: unknown case '" + name + "' (fresnel, bump, gaussian)");
  return p;
}

void statphase(const std::string& name, double a, const std::string& grid, const std::string& emit) {
  const std::vector<double> Ns = parse_grid(grid, "--N");
  const StationaryPhaseReport r = verify_remainder(statphase_case(name, a), Ns);
  json rec = json::array();
  for (const auto& x : r.records)
    rec.push_back({{"N", x.N},
                   {"direct", pair(x.direct)},
                   {"leading", pair(x.leading)},
                   {"remainder", pair(x.remainder)},
                   {"bound_shape", x.bound_shape},
                   {"ratio", x.ratio}});
  const BoundConstants& c = r.constants;
  json j{{"case", name},
         {"a", a},
         {"phase", "y^2"},
         {"constants", {{"kappa", c.kappa}, {"w0", c.w0}, {"w2", c.w2}, {"w3", c.w3}, {"g0", c.g0}, {"g1", c.g1}}},
         {"records", rec},
         {"implied_constant", r.implied_constant},
         {"decay_exponent", Ns.size() >= 2 ? json(r.decay_exponent) : json(nullptr)}};
  Output out(emit);
  out() << j.dump(1) << "\n";
}

void evolve(const SymbolOptions& o, double T, const std::string& prof, double center, double width, double range,
            double step) {
  if (T == 0 || !(width > 0) || !(range > 0) || !(step > 0))
    throw validation_error("evolve: need T != 0 and positive --width, --range, --N-step");
  ComplexFunction f;
  if (prof == "gaussian") f = [center, width](double y) { return cplx(std::exp(-(y - center) * (y - center) / (2 * width * width))); };
  else throw validation_error("evolve: unknown profile '" + prof + "' (gaussian)");
  const auto op = o.op();
  std::vector<double> grid;
  const double R = range * pi * std::abs(T);
  const long m = std::lround(std::floor(R / step));
  for (long i = -m; i <= m; ++i)
    if (i != 0) grid.push_back(step * double(i));
  const EvolutionProfile ep = evolution_profile(*op, f, grid, T);
  Output out(o.emit);
  out() << o.comment() << " T=" << num(T) << " profile=" << prof << " center=" << num(center) << " width=" << num(width)
        << " max_residual=" << num(ep.max_residual) << "\n";
  out() << "N,y,Phi,re_U,im_U";
  const bool odd = op->n() % 2 == 1;
  if (odd) out() << ",y1,Phi1,re_U1,im_U1";
  out() << "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out() << num(grid[i]) << "," << num(ep.y[i]) << "," << num(ep.Phi[i]) << "," << num(ep.U[i].real()) << ","
          << num(ep.U[i].imag());
    if (odd) out() << "," << num(ep.y1[i]) << "," << num(ep.Phi1[i]) << "," << num(ep.U1[i].real()) << "," << num(ep.U1[i].imag());
    out() << "\n";
  }
}

// ---- verify

struct Check {
  std::string name;
  std::function<double()> measure;  // returns the error
  double tol;
};

std::vector<Check> core_checks(unsigned seed) {
  std::vector<Check> c;
  c.push_back({"coeffmap round trip (50 seeded polynomials)",
               [seed] {
                 std::mt19937_64 rng(seed);
                 std::uniform_real_distribution<double> u(-3, 3);
                 std::uniform_int_distribution<int> deg(0, 6);
                 double worst = 0;
                 for (int t = 0; t < 50; ++t) {
                   std::vector<double> p(static_cast<std::size_t>(deg(rng)) + 1);
                   for (auto& x : p) x = u(rng);
                   p.back() = 1.0;
                   const RealPolynomial b = q_to_p(p_to_q(RealPolynomial(p)));
                   for (std::size_t m = 0; m < p.size(); ++m) worst = std::max(worst, std::abs(b.coeffs[m] - p[m]));
                 }
                 return worst;
               },
               1e-12});
  c.push_back({"q0 of P = X", [] { return std::abs(p_to_q(RealPolynomial{0.0, 1.0})[0] + 0.57721566490153286); }, 1e-12});
  c.push_back({"b_{n-1} = q_{n-1} v^{2/n}, n = 1..4",
               [] {
                 double worst = 0;
                 for (int n = 1; n <= 4; ++n) {
                   std::vector<double> p(static_cast<std::size_t>(n) + 1, 0.0);
                   p.back() = 1.0;
                   const OperatorCoefficients op(p_to_q(RealPolynomial(p)), WeightProfile::hankel());
                   for (double x : {-30.0, -1.0, 0.0, 2.5, 40.0, 1e3}) {
                     const auto b = op.b(x);
                     const double v = op.profile()(op.xi_of_x(x));
                     worst = std::max({worst, std::abs(b.back() - 1.0),
                                       std::abs(b[static_cast<std::size_t>(n - 1)] - op.qn1() * std::pow(v, 2.0 / n))});
                   }
                 }
                 return worst;
               },
               1e-10});
  c.push_back({"a1 quadrature rules agree, n = 1..8",
               [] {
                 double worst = 0;
                 for (int n = 1; n <= 8; ++n)
                   worst = std::max(worst, std::abs(a1_constant(n, QuadratureRule::gauss_kronrod) - a1_constant(n, QuadratureRule::tanh_sinh)));
                 return worst;
               },
               1e-8});
  c.push_back({"Carleman multiplier",
               [] {
                 const QuadraticFormResult r = quadratic_form_check(log_gaussian(0.3), RealPolynomial{1.0});
                 return std::abs(r.hankel_side - r.symbol_side);
               },
               1e-6});
  c.push_back({"quadratic form, P = X", [] { return quadratic_form_check(log_gaussian(0.0), RealPolynomial{0.0, 1.0}).residual; }, 1e-4});
  c.push_back({"Fresnel leading term",
               [] {
                 const StationaryPhaseProblem p = statphase_case("fresnel", 1.0);
                 return std::abs(leading_term(p, 100.0) - 0.5 * std::sqrt(pi / 100) * std::polar(1.0, pi / 4));
               },
               1e-12});
  c.push_back({"n = 1 gauge-trivial |s - 1|",
               [] {
                 const OperatorCoefficients op1(p_to_q(RealPolynomial{0.0, 1.0}), WeightProfile::hankel());
                 ScatteringSolver s(gauged_field(std::make_shared<const OperatorCoefficients>(op1)));
                 double worst = 0;
                 for (double lambda : {-1.0, 0.5, 2.0}) worst = std::max(worst, std::abs(s.entry(lambda, 1e3).s() - 1.0));
                 return worst;
               },
               1e-8});
  return c;
}

std::vector<Check> full_checks() {
  std::vector<Check> c;
  auto op2 = [] {
    return std::make_shared<const OperatorCoefficients>(p_to_q(RealPolynomial{0.0, 0.0, 1.0}), WeightProfile::hankel());
  };
  c.push_back({"n = 2 unitarity and reciprocity, X = 2000",
               [op2] {
                 ScatteringSolver s(gauged_field(op2()));
                 double worst = 0;
                 for (double lambda : {0.2, 1.0, 5.0}) {
                   const ScatteringEntry e = s.entry(lambda, 2000);
                   worst = std::max({worst, e.unitarity_defect, e.reciprocity_defect()});
                 }
                 return worst;
               },
               5e-4});
  c.push_back({"n = 2 Nystrom vs shooting, X = 2000",
               [op2] {
                 const auto op = op2();
                 ScatteringSolver s(gauged_field(op));
                 const ScatteringEntry e = s.entry(1.0, 2000);
                 const ShootingResult p = ode_cross_check([&](double x) { return op->b_tilde(x)[0].real(); }, 1.0, 2000);
                 return std::max(std::abs(e.S(0, 0) - p.transmission), std::abs(e.S(1, 0) - p.reflection));
               },
               5e-4});
  c.push_back({"stationary-phase remainder exponent - 1",
               [] { return std::abs(verify_remainder(statphase_case("bump", 1.0), {1e2, 1e3, 1e4, 1e5}).decay_exponent - 1.0); },
               0.15});
  return c;
}

int verify(const std::string& suite, unsigned seed) {
  if (suite != "core" && suite != "full") throw validation_error("verify: --suite must be core or full");
  std::vector<Check> checks = core_checks(seed);
  if (suite == "full")
    for (auto& c : full_checks()) checks.push_back(std::move(c));
  int failed = 0;
  for (const Check& c : checks) {
    const double err = c.measure();
    const bool ok = err < c.tol;
    failed += !ok;
    std::printf("%s %-45s %.3e (tol %.1e)\n", ok ? "PASS" : "FAIL", c.name.c_str(), err, c.tol);
  }
  std::printf("%d of %zu checks passed\n", int(checks.size()) - failed, checks.size());
  return failed ? 2 : 0;
}

int thread_cap() {
  const char* env = std::getenv("CARLEMAN_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw validation_error("CARLEMAN_THREADS must be a positive integer");
  return static_cast<int>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral analysis of generalized Carleman operators"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON configuration; command-line flags take precedence");
  app.require_subcommand(1);

  SymbolOptions so;
  SolverFlags sf;
  std::string xi_grid = "0:20:0.25", x_grid = "-20:20:0.5", lr_grid = "10,100,1000,10000,100000", N_grid = "-30:30:1";
  std::string sp_case = "fresnel", sp_N = "100,1000,10000", evo_profile = "gaussian", suite = "core";
  double lambda_min = 0.2, lambda_max = 5.0, k = 1.0, a = 1.0, T = 1000.0, center = 1.0, width = 0.2, range = 6.0;
  double N_step = 0.0;
  int points = 20, j = 3;
  unsigned seed = 1;
  bool extrapolate = false, gauged = false;
  ThetaOptions to;

  auto* mc = app.add_subcommand("map-coeffs", "Map P to the symbol Q (or back with --q); JSON {\"q\": [...]}");
  mc->add_option("--p", so.p, "Coefficients of P")->delimiter(',');
  mc->add_option("--q", so.q, "Coefficients of Q")->delimiter(',');
  mc->add_option("--emit", so.emit, "Output file ('-' for stdout)");

  auto* pr = app.add_subcommand("profile", "Tabulate v and x(xi); CSV columns xi,v,x");
  so.add(pr, false);
  pr->add_option("--xi-grid", xi_grid, "xi values (a:b:step or list)")->capture_default_str();

  auto* tr = app.add_subcommand("transform",
                                "Coefficients of the transformed operator; CSV columns x, re/im b_m and gauged "
                                "bt_m for m = 0..n, beta");
  so.add(tr);
  tr->add_option("--x-grid", x_grid, "x values (a:b:step or list)")->capture_default_str();

  auto* sc = app.add_subcommand("scatter", "Scattering matrix on a lambda grid; JSON records");
  so.add(sc);
  sf.add(sc, 1e4);
  sc->add_option("--lambda-min", lambda_min, "Smallest lambda")->capture_default_str();
  sc->add_option("--lambda-max", lambda_max, "Largest lambda")->capture_default_str();
  sc->add_option("--points", points, "Number of equispaced lambda")->capture_default_str();
  sc->add_flag("--extrapolate", extrapolate, "Also solve at 2X and extrapolate in 1/X");

  auto* lr = app.add_subcommand("longrange",
                                "Phase iterates; CSV columns x, re/im sigma_1..sigma_j, re/im theta_j, abs_residual_j");
  so.add(lr);
  lr->add_option("--j", j, "Number of iterations")->capture_default_str();
  lr->add_option("--k", k, "Momentum")->capture_default_str();
  lr->add_option("--x-grid", lr_grid, "x values (a:b:step or list)")->capture_default_str();
  lr->add_flag("--gauged", gauged, "Iterate on the gauged coefficients");

  auto* ht = app.add_subcommand("hankel-theta",
                                "Eigenfunctions in the N = ln t variable; CSV columns N, re/im theta, re/im "
                                "theta_asym (all times sqrt t), residual");
  so.add(ht);
  sf.add(ht, 4000);
  ht->add_option("--k", k, "Momentum")->capture_default_str();
  ht->add_option("--N-grid", N_grid, "N values (a:b:step or list; write --N-grid=-30:30:1)")->capture_default_str();
  ht->add_option("--N-max", to.N_max, "Largest |N| the evaluator is built for")->capture_default_str();
  ht->add_option("--core-scale", to.core_scale, "Core radius multiplier")->capture_default_str();
  ht->add_option("--density", to.density, "Relative quadrature density")->capture_default_str();

  auto* sp = app.add_subcommand("statphase", "Stationary-phase remainder report; JSON");
  sp->add_option("--case", sp_case, "Amplitude: fresnel, bump, gaussian")->capture_default_str();
  sp->add_option("--a", a, "Cutoff half-width")->capture_default_str();
  sp->add_option("--N", sp_N, "N values (list or a:b:step)")->capture_default_str();
  sp->add_option("--emit", so.emit, "Output file ('-' for stdout)");

  auto* ev = app.add_subcommand("evolve", "Large-time profile prediction; CSV columns N, y, Phi, re/im U (+ j = 1 branch for odd n)");
  so.add(ev);
  ev->add_option("--T", T, "Time")->capture_default_str();
  ev->add_option("--profile", evo_profile, "Spectral profile: gaussian")->capture_default_str();
  ev->add_option("--center", center, "Profile centre in y")->capture_default_str();
  ev->add_option("--width", width, "Profile width in y")->capture_default_str();
  ev->add_option("--range", range, "Grid half-width in units of pi T")->capture_default_str();
  ev->add_option("--N-step", N_step, "Grid step (default pi T / 200)");

  auto* vf = app.add_subcommand("verify", "Run invariant checks; nonzero exit on any failure");
  vf->add_option("--suite", suite, "core or full")->capture_default_str();
  vf->add_option("--seed", seed, "Seed of the property checks")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (const int cap = thread_cap()) Eigen::setNbThreads(cap);
    if (*mc) map_coeffs(so);
    else if (*pr) profile(so, xi_grid);
    else if (*tr) transform(so, x_grid);
    else if (*sc) scatter(so, sf, lambda_min, lambda_max, points, extrapolate);
    else if (*lr) longrange(so, j, k, lr_grid, gauged);
    else if (*ht) hankel_theta(so, sf, k, N_grid, to);
    else if (*sp) statphase(sp_case, a, sp_N, so.emit);
    else if (*ev) evolve(so, T, evo_profile, center, width, range, N_step > 0 ? N_step : pi * std::abs(T) / 200);
    else if (*vf) return verify(suite, seed);
  } catch (const validation_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const numerical_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
