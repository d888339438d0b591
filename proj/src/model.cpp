#include "kgelab/model.hpp"

#include <cmath>
#include <sstream>

namespace kgelab {

namespace {

/// |x|^e for e >= 0, exact repeated multiplication when e is a small integer.
class AbsPower {
public:
  explicit AbsPower(double e) : e_(e) {
    const double r = std::round(e);
    if (r == e && r >= 0.0 && r <= 16.0) integer_ = static_cast<int>(r);
  }

  double operator()(double x) const {
    const double a = std::abs(x);
    if (integer_ >= 0) {
      double out = 1.0;
      for (int i = 0; i < integer_; ++i) out *= a;
      return out;
    }
    return a == 0.0 ? 0.0 : std::pow(a, e_);
  }

private:
  double e_;
  int integer_ = -1;
};

void check_nonlinear_inputs(const ScalarField& u, const ScalarField& v) {
  require_same_grid(u, v);
}

}  // namespace

ExponentVerdict validate_exponents(double p, double q, int n) {
  ExponentVerdict out;
  std::ostringstream why;
  if (!std::isfinite(p) || !std::isfinite(q)) {
    out.reason = "exponents must be finite";
    return out;
  }
  if (n < 1) {
    out.reason = "dimension must be positive";
    return out;
  }
  if (!(p > 1.0) || !(q > 1.0)) {
    why << "need p > 1 and q > 1 (got p=" << p << ", q=" << q << ")";
    out.reason = why.str();
    return out;
  }
  if (n <= 2) {
    out.valid = true;
  } else {
    const double crit = (n + 2.0) / (n - 2.0);
    const bool cond_q = (q < p + 1.0 && p + 1.0 < crit) || (p + 1.0 < q && q < crit);
    const bool cond_p = (p < q + 1.0 && q + 1.0 < crit) || (q + 1.0 < p && p < crit);
    out.valid = cond_q && cond_p;
    if (!out.valid) {
      why << "subcritical conditions fail for n=" << n << " (critical exponent " << crit << ")";
      out.reason = why.str();
      return out;
    }
  }
  if (n == 2) {
    out.ground_state_ok = true;
  } else if (n == 3) {
    out.ground_state_ok = p < 2.0 && q < 2.0;
  }
  if (!out.ground_state_ok) {
    why << "ground-state window requires n=2, or n=3 with 1 < p,q < 2/(n-2)";
    out.reason = why.str();
  }
  return out;
}

ModelParams ModelParams::make(double m1, double m2, double a1, double a2, double p, double q,
                              int n, ModelOptions options) {
  if (!std::isfinite(m1) || !std::isfinite(m2) || m1 == 0.0 || m2 == 0.0)
    throw std::invalid_argument("model: masses must be finite and nonzero");
  if (!(a1 > 0.0) || !(a2 > 0.0) || !std::isfinite(a1) || !std::isfinite(a2))
    throw std::invalid_argument("model: couplings a1, a2 must be positive");
  if (n < 1 || n > 3) throw std::invalid_argument("model: dimension must be 1, 2 or 3");
  if (options.outside_theorem_range) {
    if (!(p >= 1.0) || !(q >= 1.0) || !std::isfinite(p) || !std::isfinite(q))
      throw std::invalid_argument("model: exponents must be >= 1");
  } else {
    const auto verdict = validate_exponents(p, q, n);
    if (!verdict.valid) throw std::invalid_argument("model: " + verdict.reason);
  }
  ModelParams out;
  out.m1 = m1;
  out.m2 = m2;
  out.a1 = a1;
  out.a2 = a2;
  out.p = p;
  out.q = q;
  out.n = n;
  out.alpha = a2 * (p + 1.0) / (a1 * (q + 1.0));
  out.a2prime = a2 / (q + 1.0);
  out.options = options;
  return out;
}

double ModelParams::min_mass_sq() const { return std::min(m1 * m1, m2 * m2); }

double ModelParams::u_coupling() const {
  return options.linear_test_mode ? 0.0 : a2prime * (p + 1.0) / alpha;
}

double ModelParams::v_coupling() const {
  return options.linear_test_mode ? 0.0 : a2prime * (q + 1.0);
}

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::zero: return "zero";
    case PotentialKind::harmonic: return "harmonic";
    case PotentialKind::gaussian_well: return "gaussian_well";
    case PotentialKind::file: return "file";
  }
  return "zero";
}

PotentialKind potential_kind_from_string(const std::string& name) {
  if (name == "zero") return PotentialKind::zero;
  if (name == "harmonic") return PotentialKind::harmonic;
  if (name == "gaussian_well" || name == "gaussian") return PotentialKind::gaussian_well;
  if (name == "file") return PotentialKind::file;
  throw std::invalid_argument("unknown potential kind '" + name + "'");
}

PotentialPair::PotentialPair(ScalarField K1, ScalarField K2, PotentialKind kind)
    : k1_(std::move(K1)), k2_(std::move(K2)), kind_(kind) {
  require_same_grid(k1_, k2_);
  for (const auto* k : {&k1_, &k2_}) {
    for (double x : k->values()) {
      if (!std::isfinite(x) || x < 0.0)
        throw std::invalid_argument("potential: samples must be finite and nonnegative");
    }
  }
}

PotentialPair PotentialPair::zero(const Grid& grid) {
  return PotentialPair(ScalarField(grid), ScalarField(grid), PotentialKind::zero);
}

namespace {
double radius_sq(std::span<const double> x) {
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  return r2;
}
}  // namespace

PotentialPair PotentialPair::harmonic(const Grid& grid, double strength1, double strength2) {
  if (!(strength1 >= 0.0) || !(strength2 >= 0.0))
    throw std::invalid_argument("potential: harmonic strengths must be nonnegative");
  auto k1 = ScalarField::from_function(grid, [&](auto x) { return strength1 * radius_sq(x); });
  auto k2 = ScalarField::from_function(grid, [&](auto x) { return strength2 * radius_sq(x); });
  return PotentialPair(std::move(k1), std::move(k2), PotentialKind::harmonic);
}

PotentialPair PotentialPair::gaussian_well(const Grid& grid, double depth1, double depth2,
                                           double width) {
  if (!(depth1 >= 0.0) || !(depth2 >= 0.0) || !(width > 0.0))
    throw std::invalid_argument("potential: gaussian well needs depth >= 0 and width > 0");
  const double w2 = width * width;
  auto shape = [w2](std::span<const double> x) { return 1.0 - std::exp(-radius_sq(x) / w2); };
  auto k1 = ScalarField::from_function(grid, [&](auto x) { return depth1 * shape(x); });
  auto k2 = ScalarField::from_function(grid, [&](auto x) { return depth2 * shape(x); });
  return PotentialPair(std::move(k1), std::move(k2), PotentialKind::gaussian_well);
}

PotentialPair PotentialPair::from_files(const std::string& path1, const std::string& path2) {
  return PotentialPair(load_snapshot(path1), load_snapshot(path2), PotentialKind::file);
}

double PotentialPair::sup() const { return std::max(k1_.sup_norm(), k2_.sup_norm()); }

StateVector StateVector::zero(const Grid& grid) {
  return StateVector{ScalarField(grid), ScalarField(grid), ScalarField(grid), ScalarField(grid),
                     0.0};
}

bool StateVector::overflowed() const {
  return u.overflowed() || ut.overflowed() || v.overflowed() || vt.overflowed();
}

bool StateVector::all_finite() const {
  return u.all_finite() && ut.all_finite() && v.all_finite() && vt.all_finite();
}

void StateVector::check_grids() const {
  require_same_grid(u, ut);
  require_same_grid(u, v);
  require_same_grid(u, vt);
}

double signed_power(double x, double e) {
  if (x == 0.0) return 0.0;
  const double m = std::pow(std::abs(x), e);
  return x < 0.0 ? -m : m;
}

ScalarField u_nonlinearity(const ScalarField& u, const ScalarField& v, const ModelParams& params) {
  check_nonlinear_inputs(u, v);
  const AbsPower pow_v(params.q + 1.0);
  const AbsPower pow_u(params.p - 1.0);
  ScalarField out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = pow_v(v[i]) * pow_u(u[i]) * u[i];
  return out;
}

ScalarField v_nonlinearity(const ScalarField& u, const ScalarField& v, const ModelParams& params) {
  check_nonlinear_inputs(u, v);
  const AbsPower pow_u(params.p + 1.0);
  const AbsPower pow_v(params.q - 1.0);
  ScalarField out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = pow_u(u[i]) * pow_v(v[i]) * v[i];
  return out;
}

std::pair<ScalarField, ScalarField> acceleration(const StateVector& state,
                                                 const ModelParams& params,
                                                 const PotentialPair& pot) {
  state.check_grids();
  require_same_grid(state.u, pot.K1());
  if (state.overflowed() || !state.u.all_finite() || !state.v.all_finite()) {
    ScalarField au(state.grid());
    ScalarField av(state.grid());
    au.mark_overflowed();
    av.mark_overflowed();
    return {std::move(au), std::move(av)};
  }

  ScalarField utt = laplacian(state.u);
  ScalarField vtt = laplacian(state.v);
  const double m1sq = params.m1 * params.m1;
  const double m2sq = params.m2 * params.m2;
  const double cu = params.u_coupling();
  const double cv = params.v_coupling();
  const auto& K1 = pot.K1();
  const auto& K2 = pot.K2();
  const auto& u = state.u;
  const auto& v = state.v;

  const AbsPower v_q1(params.q + 1.0), u_pm1(params.p - 1.0);
  const AbsPower u_p1(params.p + 1.0), v_qm1(params.q - 1.0);
  bool finite = true;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double nu = 0.0;
    double nv = 0.0;
    if (cu != 0.0) nu = cu * v_q1(v[i]) * u_pm1(u[i]) * u[i];
    if (cv != 0.0) nv = cv * u_p1(u[i]) * v_qm1(v[i]) * v[i];
    utt[i] += -(m1sq + K1[i]) * u[i] + nu;
    vtt[i] += -(m2sq + K2[i]) * v[i] + nv;
    finite = finite && std::isfinite(utt[i]) && std::isfinite(vtt[i]);
  }
  if (!finite) {
    utt.mark_overflowed();
    vtt.mark_overflowed();
  }
  return {std::move(utt), std::move(vtt)};
}

}  // namespace kgelab
