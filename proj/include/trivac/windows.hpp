#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "trivac/common.hpp"
#include "trivac/quadrature.hpp"

namespace trivac {

/// Coupling window eps(t) on [-T/2, T/2]. Every family is real, even in t,
/// and identically zero outside its support.
struct WindowSpec {
  enum class Family { gaussian, raised_cosine, superoscillatory, tabulated };

  Family family = Family::gaussian;
  double eps0 = 1.0;      ///< overall coupling strength
  double duration = 1.0;  ///< T; support is [-T/2, T/2]

  double sigma = 0.0;      ///< gaussian width (<= 0 picks the default T/6)
  int band_index = 1;      ///< superoscillatory band limit N (in units 2*pi/T)
  double boost = 2.0;      ///< superoscillatory boost a (> 1)
  std::vector<double> samples;  ///< tabulated values, uniform on [-T/2, T/2]
};

inline double gaussian_default_sigma(double duration) { return duration / 6.0; }

inline WindowSpec gaussian_window(double eps0, double duration,
                                  double sigma = 0.0) {
  WindowSpec w;
  w.family = WindowSpec::Family::gaussian;
  w.eps0 = eps0;
  w.duration = duration;
  w.sigma = sigma > 0.0 ? sigma : gaussian_default_sigma(duration);
  return w;
}

inline WindowSpec raised_cosine_window(double eps0, double duration) {
  WindowSpec w;
  w.family = WindowSpec::Family::raised_cosine;
  w.eps0 = eps0;
  w.duration = duration;
  return w;
}

/// Band-limited window whose local frequency near t = 0 is boost * band_index
/// carrier units, i.e. it oscillates faster than any Fourier mode it
/// contains. Rejects boost <= 1 (no superoscillation).
inline WindowSpec superosc_window(int band_index, double boost, double eps0,
                                  double duration) {
  if (band_index < 1)
    throw ConfigError("superosc_window: band index must be >= 1");
  if (!(boost > 1.0))
    throw ConfigError("superosc_window: boost must exceed 1");
  if (!(duration > 0.0)) throw ConfigError("superosc_window: duration <= 0");
  WindowSpec w;
  w.family = WindowSpec::Family::superoscillatory;
  w.eps0 = eps0;
  w.duration = duration;
  w.band_index = band_index;
  w.boost = boost;
  return w;
}

inline WindowSpec tabulated_window(std::vector<double> samples, double eps0,
                                   double duration) {
  WindowSpec w;
  w.family = WindowSpec::Family::tabulated;
  w.eps0 = eps0;
  w.duration = duration;
  w.samples = std::move(samples);
  return w;
}

inline void validate_window(const WindowSpec& w) {
  if (!(w.duration > 0.0)) throw ConfigError("window: duration must be > 0");
  switch (w.family) {
    case WindowSpec::Family::gaussian:
      if (!(w.sigma > 0.0) && !(gaussian_default_sigma(w.duration) > 0.0))
        throw ConfigError("window: gaussian sigma must be > 0");
      if (w.sigma < 0.0) throw ConfigError("window: gaussian sigma must be > 0");
      break;
    case WindowSpec::Family::raised_cosine:
      break;
    case WindowSpec::Family::superoscillatory:
      if (w.band_index < 1)
        throw ConfigError("window: superoscillatory band index must be >= 1");
      if (!(w.boost > 1.0))
        throw ConfigError("window: superoscillatory boost must exceed 1");
      break;
    case WindowSpec::Family::tabulated: {
      if (w.samples.size() < 4)
        throw ConfigError("window: tabulated needs at least 4 samples");
      // Evenness is a contract of every family; for tables we must check it.
      const std::size_t n = w.samples.size();
      for (std::size_t k = 0; k < n / 2; ++k) {
        if (std::abs(w.samples[k] - w.samples[n - 1 - k]) >
            1e-12 * (1.0 + std::abs(w.samples[k])))
          throw ConfigError("window: tabulated samples are not even in t");
      }
      break;
    }
  }
}

namespace detail {

/// (cos x + i a sin x)^N by binary powering.
inline cplx superosc_generator(double x, double boost, int band_index) {
  cplx base(std::cos(x), boost * std::sin(x));
  cplx acc(1.0, 0.0);
  int n = band_index;
  while (n > 0) {
    if (n & 1) acc *= base;
    base *= base;
    n >>= 1;
  }
  return acc;
}

/// Catmull-Rom on a uniform grid, clamped end slopes.
inline double interp_table(const std::vector<double>& s, double x01) {
  const std::size_t n = s.size();
  const double pos = x01 * (n - 1);
  auto i = static_cast<std::ptrdiff_t>(std::floor(pos));
  if (i < 0) i = 0;
  if (i > static_cast<std::ptrdiff_t>(n) - 2) i = n - 2;
  const double u = pos - i;
  const double p1 = s[i], p2 = s[i + 1];
  const double p0 = (i > 0) ? s[i - 1] : 2 * p1 - p2;
  const double p3 = (i + 2 < static_cast<std::ptrdiff_t>(n)) ? s[i + 2]
                                                             : 2 * p2 - p1;
  const double a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
  const double b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
  const double c = -0.5 * p0 + 0.5 * p2;
  return ((a * u + b) * u + c) * u + p1;
}

}  // namespace detail

inline double eval_window(const WindowSpec& w, double t) {
  validate_window(w);
  const double half = 0.5 * w.duration;
  if (std::abs(t) > half) return 0.0;
  switch (w.family) {
    case WindowSpec::Family::gaussian: {
      const double sig =
          w.sigma > 0.0 ? w.sigma : gaussian_default_sigma(w.duration);
      return w.eps0 * std::exp(-0.5 * t * t / (sig * sig));
    }
    case WindowSpec::Family::raised_cosine: {
      const double c = std::cos(pi * t / w.duration);
      return w.eps0 * c * c;
    }
    case WindowSpec::Family::superoscillatory:
      return w.eps0 *
             detail::superosc_generator(2.0 * pi * t / w.duration, w.boost,
                                        w.band_index)
                 .real();
    case WindowSpec::Family::tabulated:
      return w.eps0 * detail::interp_table(w.samples, (t + half) / w.duration);
  }
  return 0.0;
}

/// Rough upper bound on the window's internal oscillation rate (rad/time);
/// used only to seed quadrature panel counts.
inline double window_freq_hint(const WindowSpec& w) {
  switch (w.family) {
    case WindowSpec::Family::gaussian: {
      const double sig =
          w.sigma > 0.0 ? w.sigma : gaussian_default_sigma(w.duration);
      return 4.0 / sig;
    }
    case WindowSpec::Family::raised_cosine:
      return 4.0 * pi / w.duration;
    case WindowSpec::Family::superoscillatory:
      return w.band_index * w.boost * 2.0 * pi / w.duration;
    case WindowSpec::Family::tabulated:
      return pi * static_cast<double>(w.samples.size()) / w.duration;
  }
  return 0.0;
}

/// eps_hat(nu) = integral of eps(t) e^{i nu t} dt. Real because every window
/// is real and even.
inline double window_transform(const WindowSpec& w, double nu,
                               double rel_tol = 1e-12) {
  validate_window(w);
  const double half = 0.5 * w.duration;
  const int init = panels_for_oscillation(-half, half,
                                          std::abs(nu) + window_freq_hint(w));
  auto res = integrate_adaptive<cplx>(
      [&](double t) {
        return eval_window(w, t) * std::exp(cplx(0.0, nu * t));
      },
      -half, half, rel_tol, init, 4096);
  return res.value.real();
}

/// Fourier coefficients c_n (n = 0..n_max) of the periodic extension of the
/// window over its duration: c_n = (1/T) * integral eps(t) e^{-2 pi i n t/T}.
inline std::vector<cplx> fourier_coefficients(const WindowSpec& w, int n_max) {
  validate_window(w);
  const double half = 0.5 * w.duration;
  std::vector<cplx> out;
  out.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    const double nu = 2.0 * pi * n / w.duration;
    const int init =
        panels_for_oscillation(-half, half, nu + window_freq_hint(w));
    auto res = integrate_adaptive<cplx>(
        [&](double t) {
          return eval_window(w, t) * std::exp(cplx(0.0, -nu * t));
        },
        -half, half, 1e-13, init, 4096);
    out.push_back(res.value / w.duration);
  }
  return out;
}

/// Instantaneous frequency (phase derivative, rad/time) of the window's
/// underlying complex generating signal, by central finite differences.
///
/// The generating signal is family-specific: the boosted trigonometric
/// generator for the superoscillatory family, the window itself for the
/// non-oscillatory gaussian and raised-cosine families (phase identically
/// zero), and the analytic signal reconstructed from the table's Fourier
/// series for tabulated windows. Returns NaN at zeros of the signal and
/// outside the support, where the phase is undefined.
inline double local_frequency(const WindowSpec& w, double t) {
  validate_window(w);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double half = 0.5 * w.duration;
  if (std::abs(t) > half) return nan;
  const double h = 1e-6 * w.duration;

  switch (w.family) {
    case WindowSpec::Family::gaussian:
    case WindowSpec::Family::raised_cosine: {
      // Real non-negative signal: zero phase wherever it does not vanish.
      const double v = eval_window(w, t);
      return std::abs(v) > 1e-14 * std::abs(w.eps0) ? 0.0 : nan;
    }
    case WindowSpec::Family::superoscillatory: {
      // |generator| >= min(1, a)|...| > 0 for a > 1, so the phase is smooth.
      const double x0 = 2.0 * pi * (t - h) / w.duration;
      const double x1 = 2.0 * pi * (t + h) / w.duration;
      const cplx z0 = detail::superosc_generator(x0, w.boost, w.band_index);
      const cplx z1 = detail::superosc_generator(x1, w.boost, w.band_index);
      if (std::abs(z0) == 0.0 || std::abs(z1) == 0.0) return nan;
      return std::arg(z1 * std::conj(z0)) / (2.0 * h);
    }
    case WindowSpec::Family::tabulated: {
      // Analytic signal: drop the negative-frequency half of the table's
      // spectrum. Trapezoid sums over the uniform grid are spectrally
      // accurate for the periodic extension.
      const std::size_t n = w.samples.size();
      const int n_modes = static_cast<int>((n - 1) / 2);
      std::vector<cplx> c(n_modes + 1, cplx(0.0, 0.0));
      for (int m = 0; m <= n_modes; ++m) {
        cplx acc(0.0, 0.0);
        for (std::size_t k = 0; k + 1 < n; ++k) {  // trapezoid, periodic seam
          const double tk = -half + w.duration * k / (n - 1);
          acc += w.samples[k] * std::exp(cplx(0.0, -2.0 * pi * m * tk /
                                                       w.duration));
        }
        c[m] = acc / static_cast<double>(n - 1);
      }
      auto analytic = [&](double tt) {
        cplx z = c[0];
        for (int m = 1; m <= n_modes; ++m)
          z += 2.0 * c[m] *
               std::exp(cplx(0.0, 2.0 * pi * m * tt / w.duration));
        return z;
      };
      double scale = std::abs(c[0]);
      for (int m = 1; m <= n_modes; ++m) scale += 2.0 * std::abs(c[m]);
      const cplx z0 = analytic(t - h), z1 = analytic(t + h);
      if (std::abs(z0) < 1e-12 * scale || std::abs(z1) < 1e-12 * scale)
        return nan;
      return std::arg(z1 * std::conj(z0)) / (2.0 * h);
    }
  }
  return nan;
}

}  // namespace trivac
