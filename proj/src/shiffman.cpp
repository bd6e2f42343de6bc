#include "maxsurf/shiffman.hpp"

#include <algorithm>
#include <cmath>

namespace maxsurf {

namespace {

struct LevelGen {
  Complex W;   // level generator
  Complex DW;  // its level derivative
};

// W = z g'/g and DW = z d/dz W in the annulus chart; W = g'/g and DW = dW/dz
// in the strip chart, matching the height normalizations X3 ~ log|z| / Re z.
LevelGen level_generator(const WeierstrassData& w, Complex z, bool need_second) {
  const Complex g = w.g(z);
  const Complex gp = w.dg(z);
  LevelGen out;
  if (w.domain.chart == HeightChart::LogRadial) {
    out.W = z * gp / g;
    if (need_second) {
      const Complex gpp = w.d2g(z);
      out.DW = out.W + z * z * gpp / g - out.W * out.W;
    }
  } else {
    out.W = gp / g;
    if (need_second) {
      const Complex gpp = w.d2g(z);
      out.DW = gpp / g - out.W * out.W;
    }
  }
  return out;
}

double level_weight(const WeierstrassData& w, Complex z) {
  return w.domain.chart == HeightChart::LogRadial ? std::abs(z) : 1.0;
}

}  // namespace

double ShiffmanField::max_abs_u() const {
  double m = 0.0;
  for (size_t k = 0; k < u.size(); ++k)
    if (mask[k]) m = std::max(m, std::abs(u[k]));
  return m;
}

double level_curvature(const WeierstrassData& w, Complex z) {
  const double lam = metric_factor(w, z);
  if (lam < 1e-10) throw SingularPoint("metric degenerates at the evaluation point");
  const LevelGen lg = level_generator(w, z, false);
  return lg.W.real() / (level_weight(w, z) * lam);
}

double shiffman_u(const WeierstrassData& w, Complex z) {
  if (!w.d2g) throw InvalidArgument("Shiffman evaluation needs g''");
  const double m2 = std::norm(w.g(z));
  if (std::abs(std::sqrt(m2) - 1.0) < 1e-10) {
    throw SingularPoint("|g| = 1 at the evaluation point");
  }
  const LevelGen lg = level_generator(w, z, true);
  const Complex bracket = 0.5 * (m2 + 1.0) / (m2 - 1.0) * lg.W * lg.W - lg.DW;
  return bracket.imag();
}

double harmonic_h(const WeierstrassData& w, Complex z) {
  const double mg = std::abs(w.g(z));
  if (mg < 1e-8 || mg > 1e8) throw SingularPoint("interior zero or pole of g");
  return level_generator(w, z, false).W.real();
}

double singular_circle_combination(const WeierstrassData& w, Complex z) {
  const Complex g = w.g(z);
  const Complex dlog = w.dg(z) / g;
  return (dlog * dlog).imag() / std::abs(g * g - 1.0);
}

ShiffmanField sample_shiffman(const WeierstrassData& w, const ShiffmanGridSpec& spec) {
  if (spec.n_s < 4 || spec.n_t < 4) throw GridTooCoarse("Shiffman grid below 4x4");
  if (!w.d2g) throw InvalidArgument("Shiffman sampling needs g''");
  ShiffmanField f;
  f.chart = w.domain.chart;
  f.n_s = spec.n_s;
  f.n_t = spec.n_t;
  f.s_min = spec.s_min;
  f.t_min = spec.t_min;
  f.hs = (spec.s_max - spec.s_min) / (spec.n_s - 1);
  f.ht = (spec.t_max - spec.t_min) / (spec.n_t - 1);
  const size_t n = static_cast<size_t>(f.n_s) * f.n_t;
  f.u.assign(n, 0.0);
  f.kappa.assign(n, 0.0);
  f.h.assign(n, 0.0);
  f.lambda_chart.assign(n, 0.0);
  f.K.assign(n, 0.0);
  f.mask.assign(n, 0);

  std::vector<uint8_t> singular(n, 0);
  std::vector<double> gdist(n, 0.0);  // |g| - 1, for crossing detection
  for (int i = 0; i < f.n_s; ++i) {
    for (int j = 0; j < f.n_t; ++j) {
      const double s = spec.s_min + i * f.hs;
      const double t = spec.t_min + j * f.ht;
      const Complex z = f.chart == HeightChart::LogRadial ? std::polar(std::exp(s), t)
                                                          : Complex(s, t);
      const size_t k = f.idx(i, j);
      const Complex g = w.g(z);
      const double m2 = std::norm(g);
      const double lam = 0.5 * std::abs(1.0 - m2) * std::abs(w.eta(z));
      gdist[k] = std::sqrt(m2) - 1.0;
      if (std::abs(std::sqrt(m2) - 1.0) < 1e-6 || lam < 1e-10) {
        singular[k] = 1;
        continue;
      }
      const LevelGen lg = level_generator(w, z, true);
      const Complex bracket = 0.5 * (m2 + 1.0) / (m2 - 1.0) * lg.W * lg.W - lg.DW;
      f.u[k] = bracket.imag();
      f.h[k] = lg.W.real();
      f.kappa[k] = lg.W.real() / (level_weight(w, z) * lam);
      f.lambda_chart[k] = lam * (f.chart == HeightChart::LogRadial ? std::abs(z) : 1.0);
      const double denom = std::abs(1.0 - m2) * std::abs(1.0 - m2) * std::abs(w.eta(z));
      const double root = 4.0 * std::abs(w.dg(z)) / denom;
      f.K[k] = root * root;
      f.mask[k] = 1;
    }
  }
  // the singular set also passes between samples: flag sign changes of |g| - 1
  for (int i = 0; i < f.n_s; ++i) {
    for (int j = 0; j < f.n_t; ++j) {
      const size_t k = f.idx(i, j);
      if ((j + 1 < f.n_t && gdist[k] * gdist[f.idx(i, j + 1)] < 0.0) ||
          (i + 1 < f.n_s && gdist[k] * gdist[f.idx(i + 1, j)] < 0.0)) {
        singular[k] = 1;
      }
    }
  }
  // guard band: drop samples within 2 cells of the singular set
  for (int i = 0; i < f.n_s; ++i) {
    for (int j = 0; j < f.n_t; ++j) {
      if (!singular[f.idx(i, j)]) continue;
      for (int di = -2; di <= 2; ++di) {
        for (int dj = -2; dj <= 2; ++dj) {
          const int ii = i + di, jj = j + dj;
          if (ii >= 0 && ii < f.n_s && jj >= 0 && jj < f.n_t) f.mask[f.idx(ii, jj)] = 0;
        }
      }
    }
  }
  return f;
}

namespace {

template <typename Fn>
double max_stencil_value(const ShiffmanField& f, Fn&& fn) {
  int usable = 0;
  double out = 0.0;
  for (int i = 1; i + 1 < f.n_s; ++i) {
    for (int j = 1; j + 1 < f.n_t; ++j) {
      const size_t c = f.idx(i, j);
      if (!(f.mask[c] && f.mask[f.idx(i - 1, j)] && f.mask[f.idx(i + 1, j)] &&
            f.mask[f.idx(i, j - 1)] && f.mask[f.idx(i, j + 1)])) {
        continue;
      }
      ++usable;
      out = std::max(out, std::abs(fn(i, j)));
    }
  }
  if (usable < 256) throw GridTooCoarse("fewer than 16x16 usable interior nodes");
  return out;
}

}  // namespace

double jacobi_residual(const ShiffmanField& f) {
  return max_stencil_value(f, [&](int i, int j) {
    const size_t c = f.idx(i, j);
    const double lap =
        (f.u[f.idx(i + 1, j)] - 2.0 * f.u[c] + f.u[f.idx(i - 1, j)]) / (f.hs * f.hs) +
        (f.u[f.idx(i, j + 1)] - 2.0 * f.u[c] + f.u[f.idx(i, j - 1)]) / (f.ht * f.ht);
    const double lam = f.lambda_chart[c];
    return lap - 2.0 * f.K[c] * lam * lam * f.u[c];
  });
}

double harmonic_h_residual(const ShiffmanField& f) {
  return max_stencil_value(f, [&](int i, int j) {
    const size_t c = f.idx(i, j);
    return (f.h[f.idx(i + 1, j)] - 2.0 * f.h[c] + f.h[f.idx(i - 1, j)]) / (f.hs * f.hs) +
           (f.h[f.idx(i, j + 1)] - 2.0 * f.h[c] + f.h[f.idx(i, j - 1)]) / (f.ht * f.ht);
  });
}

double harmonic_h_residual(const WeierstrassData& w, const ShiffmanGridSpec& spec) {
  // refuse data whose g degenerates at an interior sample
  for (int i = 0; i < spec.n_s; i += std::max(1, spec.n_s / 32)) {
    for (int j = 0; j < spec.n_t; j += std::max(1, spec.n_t / 32)) {
      const double s = spec.s_min + i * (spec.s_max - spec.s_min) / (spec.n_s - 1);
      const double t = spec.t_min + j * (spec.t_max - spec.t_min) / (spec.n_t - 1);
      const Complex z = w.domain.chart == HeightChart::LogRadial
                            ? std::polar(std::exp(s), t)
                            : Complex(s, t);
      const double mg = std::abs(w.g(z));
      if (mg < 1e-8 || mg > 1e8) throw SingularPoint("interior zero or pole of g");
    }
  }
  return harmonic_h_residual(sample_shiffman(w, spec));
}

}  // namespace maxsurf
