#pragma once
// Globally adaptive Gauss-Kronrod (10/21) integration over the real line for
// matrix-valued integrands. Finite panels come from user breakpoints; the two
// semi-infinite tails are mapped onto (0, 1] by w = a +/- L (1 - u) / u.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace optomag::quad {

namespace detail {
// Gauss-Kronrod pair: `xk` are the positive Kronrod abscissae (the Gauss
// points are the odd entries), the center node is implicit.
template <std::size_t N>
struct KronrodRule {
  std::array<double, N> xk;
  std::array<double, N> wk;
  double wk_center;
  std::array<double, N / 2> wg;  // weights of xk[1], xk[3], ...
  double wg_center;
};

// QUADPACK qk15 (7-point Gauss).
inline constexpr KronrodRule<7> gk15{
    {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
     0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
     0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
     0.207784955007898467600689403773245},
    {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
     0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
     0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
     0.204432940075298892414161999234649},
    0.209482141084727828012999174891714,
    {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
     0.381830050505118944950369775488975},
    0.417959183673469387755102040816327};

// QUADPACK qk21 (10-point Gauss, no center Gauss node).
inline constexpr KronrodRule<10> gk21{
    {0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
     0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
     0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
     0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
     0.294392862701460198131126603103866, 0.148874338981631210884826001129720},
    {0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
     0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
     0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
     0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
     0.142775938577060080797094273138717, 0.147739104901338491374841515972068},
    0.149445554002916905664936468389821,
    {0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
     0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
     0.295524224714752870173892994651338},
    0.0};

inline constexpr const auto& kRule = gk21;
}  // namespace detail

struct Settings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  std::size_t max_panels = 100000;
};

template <class Value>
struct Result {
  Value value;
  double error = 0.0;
  std::size_t panels = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

enum class Map { none, upper_tail, lower_tail };

template <class Value>
struct Panel {
  double lo, hi;  // in the integration variable (w, or u for tails)
  Map map;
  double anchor, scale;
  Value value;
  double error;
};

/// `f(w)` returns a fixed-size Eigen matrix; `norm(v)` a scalar magnitude.
/// `breakpoints` must be sorted and finite; tails start at its end points.
template <class F, class Norm>
auto integrate_real_line(F&& f, Norm&& norm, const std::vector<double>& breakpoints,
                         double tail_scale, const Settings& s) {
  using Value = std::decay_t<decltype(f(0.0))>;
  using P = Panel<Value>;
  Result<Value> res;

  auto eval = [&](double u, Map map, double anchor, double scale) -> Value {
    switch (map) {
      case Map::upper_tail: {
        const double w = anchor + scale * (1.0 - u) / u;
        return f(w) * (scale / (u * u));
      }
      case Map::lower_tail: {
        const double w = anchor - scale * (1.0 - u) / u;
        return f(w) * (scale / (u * u));
      }
      case Map::none: break;
    }
    return f(u);
  };

  // Error estimate as in QUADPACK: |K - G| rescaled by the spread of the
  // integrand over the panel, resasc = \int |f - mean f|.
  constexpr auto& rule = detail::kRule;
  constexpr std::size_t kNodes = rule.xk.size();
  std::array<Value, 2 * kNodes + 1> fv;
  auto make = [&](double lo, double hi, Map map, double anchor, double scale) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    fv[2 * kNodes] = eval(c, map, anchor, scale);
    for (std::size_t j = 0; j < kNodes; ++j) {
      const double dx = h * rule.xk[j];
      fv[2 * j] = eval(c - dx, map, anchor, scale);
      fv[2 * j + 1] = eval(c + dx, map, anchor, scale);
    }
    res.evaluations += fv.size();
    Value kron = fv[2 * kNodes] * rule.wk_center;
    Value gauss = fv[2 * kNodes] * rule.wg_center;
    for (std::size_t j = 0; j < kNodes; ++j) {
      Value sum = fv[2 * j] + fv[2 * j + 1];
      kron += sum * rule.wk[j];
      if (j % 2 == 1) gauss += sum * rule.wg[j / 2];
    }
    const Value mean = kron * 0.5;
    double resasc = rule.wk_center * norm(Value(fv[2 * kNodes] - mean));
    for (std::size_t j = 0; j < kNodes; ++j)
      resasc += rule.wk[j] * (norm(Value(fv[2 * j] - mean)) + norm(Value(fv[2 * j + 1] - mean)));
    resasc *= h;
    kron *= h;
    gauss *= h;
    double err = norm(Value(kron - gauss));
    if (resasc > 0.0 && err > 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    return P{lo, hi, map, anchor, scale, kron, err};
  };

  std::vector<P> heap;
  auto cmp = [](const P& a, const P& b) { return a.error < b.error; };
  auto push = [&](P p) {
    heap.push_back(std::move(p));
    std::push_heap(heap.begin(), heap.end(), cmp);
  };

  const double lscale = tail_scale > 0.0 ? tail_scale : 1.0;
  push(make(0.0, 1.0, Map::lower_tail, breakpoints.front(), lscale));
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    if (breakpoints[i + 1] > breakpoints[i]) push(make(breakpoints[i], breakpoints[i + 1], Map::none, 0, 0));
  push(make(0.0, 1.0, Map::upper_tail, breakpoints.back(), lscale));

  Value total = heap.front().value;
  total.setZero();
  double err = 0.0;
  for (const auto& p : heap) {
    total += p.value;
    err += p.error;
  }

  while (true) {
    const double target = std::max(s.abs_tol, s.rel_tol * norm(total));
    if (err <= target) {
      res.converged = true;
      break;
    }
    if (heap.size() >= s.max_panels) break;
    std::pop_heap(heap.begin(), heap.end(), cmp);
    P worst = std::move(heap.back());
    heap.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {  // cannot subdivide further
      push(std::move(worst));
      break;
    }
    P left = make(worst.lo, mid, worst.map, worst.anchor, worst.scale);
    P right = make(mid, worst.hi, worst.map, worst.anchor, worst.scale);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    push(std::move(left));
    push(std::move(right));
  }

  // Re-sum to shed the drift of the incremental updates.
  total.setZero();
  err = 0.0;
  for (const auto& p : heap) {
    total += p.value;
    err += p.error;
  }
  res.value = total;
  res.error = err;
  res.panels = heap.size();
  return res;
}

}  // namespace optomag::quad
