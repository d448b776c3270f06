#pragma once

// Catalog of boundary data functions on a single boundary line: closed-form
// value/derivative/norms, effective support ranges for quadrature, exact heat
// convolutions where available, and a small text grammar used by the CLI
// ("gauss(1,0,1)", "ind(0,1)", "hat(0,0.5)", "plateau(-1,1,0.5)",
// "grid(x0,dx,v0,v1,...)", "const(2)", "zero").

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "striplab/common.hpp"
#include "striplab/quadrature.hpp"

namespace striplab {

namespace detail {

inline double sinc(double z) {
  if (std::abs(z) < 1e-8) return 1.0 - z * z / 6.0;
  return std::sin(z) / z;
}

// cos(pi u / 2) / (1 - u^2), the removable singularities at |u| = 1 written out
inline double raised_cosine_factor(double u) {
  const double e = 1.0 - std::abs(u);
  const double num = std::abs(e) < 1e-7 ? 0.5 * kPi * (1.0 - e * e * kPi * kPi / 24.0)
                                        : std::sin(0.5 * kPi * e) / e;
  return num / (2.0 - e);
}

}  // namespace detail

// decay envelope |fourier(xi)| <= amp / xi^power for xi >= floor; gaussian-type
// data sets `super` and the envelope is amp * exp(-(width*xi)^2/4) instead
struct FourierDecay {
  double amp = 0.0;
  double power = 1.0;
  double floor = 8.0;
  bool super = false;
  double width = 0.0;
};

struct SupportRange {
  double lo = 0.0;
  double hi = 0.0;
  bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
  double width() const { return hi - lo; }
};

enum class DataKind { zero, constant, gaussian, indicator, hat, plateau, grid };

class BoundaryFunction {
 public:
  BoundaryFunction() = default;

  static BoundaryFunction zero() { return BoundaryFunction(); }

  static BoundaryFunction constant(double c) {
    BoundaryFunction f;
    f.kind_ = DataKind::constant;
    f.p_ = {c};
    return f;
  }

  // amp * exp(-((x-center)/width)^2)
  static BoundaryFunction gaussian(double amp, double center, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("gaussian width must be positive");
    BoundaryFunction f;
    f.kind_ = DataKind::gaussian;
    f.p_ = {amp, center, width};
    return f;
  }

  static BoundaryFunction indicator(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("indicator needs lo < hi");
    BoundaryFunction f;
    f.kind_ = DataKind::indicator;
    f.p_ = {lo, hi};
    return f;
  }

  // unit-peak tent on [center-width, center+width]
  static BoundaryFunction hat(double center, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("hat width must be positive");
    BoundaryFunction f;
    f.kind_ = DataKind::hat;
    f.p_ = {center, width};
    return f;
  }

  // 1 on [lo, hi], cosine^2 ramps of length ramp on both sides
  static BoundaryFunction plateau(double lo, double hi, double ramp) {
    if (!(lo < hi) || !(ramp > 0.0)) throw std::invalid_argument("plateau needs lo < hi, ramp > 0");
    BoundaryFunction f;
    f.kind_ = DataKind::plateau;
    f.p_ = {lo, hi, ramp};
    return f;
  }

  // piecewise-linear interpolation of samples at x0 + i*dx, zero outside
  static BoundaryFunction grid(double x0, double dx, std::vector<double> values) {
    if (!(dx > 0.0) || values.size() < 2) throw std::invalid_argument("grid needs dx > 0 and >= 2 samples");
    BoundaryFunction f;
    f.kind_ = DataKind::grid;
    f.p_ = {x0, dx};
    f.vals_ = std::move(values);
    return f;
  }

  DataKind kind() const { return kind_; }

  double operator()(double x) const {
    switch (kind_) {
      case DataKind::zero:
        return 0.0;
      case DataKind::constant:
        return p_[0];
      case DataKind::gaussian: {
        const double z = (x - p_[1]) / p_[2];
        return p_[0] * std::exp(-z * z);
      }
      case DataKind::indicator:
        return (x >= p_[0] && x <= p_[1]) ? 1.0 : 0.0;
      case DataKind::hat: {
        const double z = std::abs(x - p_[0]) / p_[1];
        return z < 1.0 ? 1.0 - z : 0.0;
      }
      case DataKind::plateau: {
        if (x >= p_[0] && x <= p_[1]) return 1.0;
        const double d = x < p_[0] ? p_[0] - x : x - p_[1];
        if (d >= p_[2]) return 0.0;
        const double c = std::cos(0.5 * kPi * d / p_[2]);
        return c * c;
      }
      case DataKind::grid: {
        const double s = (x - p_[0]) / p_[1];
        const double last = static_cast<double>(vals_.size() - 1);
        if (s == 0.0) return vals_.front();
        if (s == last) return vals_.back();
        if (s < 0.0 || s > last) return 0.0;
        const auto i = static_cast<std::size_t>(s);
        const double w = s - static_cast<double>(i);
        return vals_[i] * (1.0 - w) + vals_[i + 1] * w;
      }
    }
    return 0.0;
  }

  // derivative almost everywhere (kinks get the right-hand slope)
  double derivative(double x) const {
    switch (kind_) {
      case DataKind::zero:
      case DataKind::constant:
      case DataKind::indicator:
        return 0.0;
      case DataKind::gaussian: {
        const double z = (x - p_[1]) / p_[2];
        return -2.0 * z / p_[2] * p_[0] * std::exp(-z * z);
      }
      case DataKind::hat: {
        const double u = x - p_[0];
        if (std::abs(u) >= p_[1]) return 0.0;
        return u < 0.0 ? 1.0 / p_[1] : -1.0 / p_[1];
      }
      case DataKind::plateau: {
        if (x >= p_[0] && x <= p_[1]) return 0.0;
        const double d = x < p_[0] ? p_[0] - x : x - p_[1];
        if (d >= p_[2]) return 0.0;
        const double th = 0.5 * kPi * d / p_[2];
        const double mag = 0.5 * kPi / p_[2] * std::sin(2.0 * th);
        return x < p_[0] ? mag : -mag;
      }
      case DataKind::grid: {
        const double s = (x - p_[0]) / p_[1];
        if (s <= 0.0 || s >= static_cast<double>(vals_.size() - 1)) return 0.0;
        const auto i = static_cast<std::size_t>(s);
        return (vals_[i + 1] - vals_[i]) / p_[1];
      }
    }
    return 0.0;
  }

  // interval outside which |f| <= tol
  SupportRange range(double tol = 1e-14) const {
    switch (kind_) {
      case DataKind::zero:
        return {0.0, 0.0};
      case DataKind::constant:
        return p_[0] == 0.0 ? SupportRange{0.0, 0.0} : SupportRange{-kInf, kInf};
      case DataKind::gaussian: {
        const double amp = std::abs(p_[0]);
        if (amp <= tol) return {p_[1], p_[1]};
        const double r = p_[2] * std::sqrt(std::log(amp / tol));
        return {p_[1] - r, p_[1] + r};
      }
      case DataKind::indicator:
        return {p_[0], p_[1]};
      case DataKind::hat:
        return {p_[0] - p_[1], p_[0] + p_[1]};
      case DataKind::plateau:
        return {p_[0] - p_[2], p_[1] + p_[2]};
      case DataKind::grid:
        return {p_[0], p_[0] + p_[1] * static_cast<double>(vals_.size() - 1)};
    }
    return {0.0, 0.0};
  }

  bool is_zero() const { return kind_ == DataKind::zero || (kind_ == DataKind::constant && p_[0] == 0.0); }

  // exact squared L2 norm; +inf for nonzero constants
  double l2_norm_sq() const {
    switch (kind_) {
      case DataKind::zero:
        return 0.0;
      case DataKind::constant:
        return p_[0] == 0.0 ? 0.0 : kInf;
      case DataKind::gaussian:
        return p_[0] * p_[0] * p_[2] * std::sqrt(kPi / 2.0);
      case DataKind::indicator:
        return p_[1] - p_[0];
      case DataKind::hat:
        return 2.0 * p_[1] / 3.0;
      case DataKind::plateau:
        return (p_[1] - p_[0]) + 0.75 * p_[2];
      case DataKind::grid: {
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < vals_.size(); ++i)
          s += (vals_[i] * vals_[i] + vals_[i] * vals_[i + 1] + vals_[i + 1] * vals_[i + 1]) / 3.0;
        return s * p_[1];
      }
    }
    return 0.0;
  }

  // exact squared L2 norm of the a.e. derivative; +inf for jumps
  double deriv_l2_norm_sq() const {
    switch (kind_) {
      case DataKind::zero:
      case DataKind::constant:
        return 0.0;
      case DataKind::indicator:
        return kInf;
      case DataKind::gaussian:
        return p_[0] * p_[0] / p_[2] * std::sqrt(2.0 * kPi) / 2.0;
      case DataKind::hat:
        return 2.0 / p_[1];
      case DataKind::plateau:
        return kPi * kPi / (4.0 * p_[2]);
      case DataKind::grid: {
        if (vals_.front() != 0.0 || vals_.back() != 0.0) return kInf;  // support-edge jumps
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < vals_.size(); ++i) {
          const double d = (vals_[i + 1] - vals_[i]) / p_[1];
          s += d * d;
        }
        return s * p_[1];
      }
    }
    return 0.0;
  }

  // points where the function or one of its derivatives is discontinuous
  std::vector<double> breakpoints() const {
    switch (kind_) {
      case DataKind::indicator:
        return {p_[0], p_[1]};
      case DataKind::hat:
        return {p_[0] - p_[1], p_[0], p_[0] + p_[1]};
      case DataKind::plateau:
        return {p_[0] - p_[2], p_[0], p_[1], p_[1] + p_[2]};
      case DataKind::grid: {
        std::vector<double> pts(vals_.size());
        for (std::size_t i = 0; i < vals_.size(); ++i)
          pts[i] = p_[0] + p_[1] * static_cast<double>(i);
        return pts;
      }
      default:
        return {};
    }
  }

  // finite half-order boundary energy (jumps fail, kinks are fine)
  bool half_order_regular() const {
    if (kind_ == DataKind::indicator) return false;
    if (kind_ == DataKind::grid) return vals_.front() == 0.0 && vals_.back() == 0.0;
    return true;
  }

  // (heat kernel of variance t) * f, closed form where available, else a
  // short adaptive quadrature over the effective support
  double heat_convolution(double t, double x) const {
    if (!(t > 0.0)) throw std::invalid_argument("heat_convolution: t must be positive");
    const double rt = std::sqrt(t);
    auto Phi = [&](double z) { return 0.5 * std::erfc(-z / (rt * std::sqrt(2.0))); };
    auto phi = [&](double z) { return std::exp(-z * z / (2.0 * t)) / std::sqrt(kTwoPi * t); };
    switch (kind_) {
      case DataKind::zero:
        return 0.0;
      case DataKind::constant:
        return p_[0];
      case DataKind::gaussian: {
        const double w2 = p_[2] * p_[2] + 2.0 * t;
        const double d = x - p_[1];
        return p_[0] * p_[2] / std::sqrt(w2) * std::exp(-d * d / w2);
      }
      case DataKind::indicator:
        return Phi(p_[1] - x) - Phi(p_[0] - x);
      case DataKind::hat: {
        // tent(u) = ((u+w)_+ - 2 u_+ + (u-w)_+)/w and E[(Y+s)_+] closed
        const double mu = p_[0] - x;  // Y = (center - x) + N(0,t), tent arg -Y symmetric
        auto ramp = [&](double m) { return m * Phi(m) + t * phi(m); };
        return (ramp(mu + p_[1]) - 2.0 * ramp(mu) + ramp(mu - p_[1])) / p_[1];
      }
      default: {
        const SupportRange r = range(1e-16);
        std::vector<double> pts{r.lo, r.hi};
        if (kind_ == DataKind::grid)
          for (std::size_t i = 1; i + 1 < vals_.size(); ++i)
            pts.push_back(p_[0] + p_[1] * static_cast<double>(i));
        for (double s : {-6.0, -1.0, 0.0, 1.0, 6.0}) pts.push_back(x + s * rt);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::remove_if(pts.begin(), pts.end(),
                                 [&](double p) { return p < r.lo || p > r.hi; }),
                  pts.end());
        auto f = [&](double y) { return (*this)(y)*phi(y - x); };
        return integrate_path(f, pts, 1e-12).value;
      }
    }
  }

  // \int f(x) exp(-i xi x) dx, closed form for every integrable entry
  std::complex<double> fourier(double xi) const {
    const std::complex<double> I{0.0, 1.0};
    switch (kind_) {
      case DataKind::zero:
        return {0.0, 0.0};
      case DataKind::constant:
        throw std::invalid_argument("fourier: constant data is not integrable");
      case DataKind::gaussian: {
        const double w = p_[2];
        return p_[0] * w * std::sqrt(kPi) * std::exp(-0.25 * w * w * xi * xi) *
               std::polar(1.0, -xi * p_[1]);
      }
      case DataKind::indicator: {
        const double len = p_[1] - p_[0];
        return len * detail::sinc(0.5 * xi * len) * std::polar(1.0, -0.5 * xi * (p_[0] + p_[1]));
      }
      case DataKind::hat: {
        const double s = detail::sinc(0.5 * xi * p_[1]);
        return p_[1] * s * s * std::polar(1.0, -xi * p_[0]);
      }
      case DataKind::plateau: {
        // flat top convolved with a cosine bump: indicator transform times the
        // bump transform
        const double len = (p_[1] - p_[0]) + p_[2];
        return len * detail::sinc(0.5 * xi * len) *
               detail::raised_cosine_factor(xi * p_[2] / kPi) *
               std::polar(1.0, -0.5 * xi * (p_[0] + p_[1]));
      }
      case DataKind::grid: {
        // exact segment-by-segment transform of the linear interpolant
        const double d = p_[1];
        std::complex<double> total{0.0, 0.0};
        const std::complex<double> F0 =
            d * detail::sinc(0.5 * xi * d) * std::polar(1.0, -0.5 * xi * d);
        const std::complex<double> F1 =
            std::abs(xi * d) < 1e-5
                ? std::complex<double>{0.5 * d * d, -xi * d * d * d / 3.0}
                : (F0 - d * std::polar(1.0, -xi * d)) / (I * xi);
        for (std::size_t j = 0; j + 1 < vals_.size(); ++j) {
          const double xj = p_[0] + d * static_cast<double>(j);
          const double slope = (vals_[j + 1] - vals_[j]) / d;
          total += std::polar(1.0, -xi * xj) * (vals_[j] * F0 + slope * F1);
        }
        return total;
      }
    }
    return {0.0, 0.0};
  }

  FourierDecay fourier_decay() const {
    switch (kind_) {
      case DataKind::zero:
        return {0.0, 1.0, 8.0, false};
      case DataKind::constant:
        throw std::invalid_argument("fourier_decay: constant data is not integrable");
      case DataKind::gaussian:
        return {std::abs(p_[0]) * p_[2] * std::sqrt(kPi), 0.0, std::max(8.0, 12.0 / p_[2]), true,
                p_[2]};
      case DataKind::indicator:
        return {2.0, 1.0, 8.0, false};
      case DataKind::hat:
        return {4.0 / p_[1], 2.0, 8.0, false};
      case DataKind::plateau:
        return {4.0 * kPi * kPi / (p_[2] * p_[2]), 3.0, std::max(8.0, 4.5 / p_[2]), false};
      case DataKind::grid: {
        double tv = std::abs(vals_.front()) + std::abs(vals_.back());
        for (std::size_t j = 0; j + 1 < vals_.size(); ++j) tv += std::abs(vals_[j + 1] - vals_[j]);
        return {tv, 1.0, 8.0, false};
      }
    }
    return {0.0, 1.0, 8.0, false};
  }

  std::string label() const {
    std::ostringstream os;
    os.precision(12);
    switch (kind_) {
      case DataKind::zero:
        os << "zero";
        break;
      case DataKind::constant:
        os << "const(" << p_[0] << ")";
        break;
      case DataKind::gaussian:
        os << "gauss(" << p_[0] << "," << p_[1] << "," << p_[2] << ")";
        break;
      case DataKind::indicator:
        os << "ind(" << p_[0] << "," << p_[1] << ")";
        break;
      case DataKind::hat:
        os << "hat(" << p_[0] << "," << p_[1] << ")";
        break;
      case DataKind::plateau:
        os << "plateau(" << p_[0] << "," << p_[1] << "," << p_[2] << ")";
        break;
      case DataKind::grid:
        os << "grid(" << p_[0] << "," << p_[1] << ",n=" << vals_.size() << ")";
        break;
    }
    return os.str();
  }

  static BoundaryFunction parse(const std::string& text) {
    std::string s;
    for (char c : text)
      if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s == "zero" || s == "0") return zero();
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')')
      throw std::invalid_argument("cannot parse boundary function: " + text);
    const std::string name = s.substr(0, open);
    std::vector<double> args;
    std::string body = s.substr(open + 1, s.size() - open - 2);
    std::istringstream is(body);
    std::string tok;
    while (std::getline(is, tok, ',')) {
      if (tok.empty()) throw std::invalid_argument("empty argument in: " + text);
      std::size_t used = 0;
      args.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument("bad number in: " + text);
    }
    auto need = [&](std::size_t n) {
      if (args.size() != n) throw std::invalid_argument("wrong argument count in: " + text);
    };
    if (name == "const") {
      need(1);
      return constant(args[0]);
    }
    if (name == "gauss" || name == "gaussian") {
      need(3);
      return gaussian(args[0], args[1], args[2]);
    }
    if (name == "ind" || name == "indicator") {
      need(2);
      return indicator(args[0], args[1]);
    }
    if (name == "hat") {
      need(2);
      return hat(args[0], args[1]);
    }
    if (name == "plateau") {
      need(3);
      return plateau(args[0], args[1], args[2]);
    }
    if (name == "grid") {
      if (args.size() < 4) throw std::invalid_argument("grid needs x0, dx and >= 2 samples");
      return grid(args[0], args[1], {args.begin() + 2, args.end()});
    }
    throw std::invalid_argument("unknown boundary function: " + text);
  }

 private:
  DataKind kind_ = DataKind::zero;
  std::vector<double> p_;
  std::vector<double> vals_;
};

// Data for the two boundary lines: first the lower line, then the upper.
struct BoundaryPair {
  BoundaryFunction lower;
  BoundaryFunction upper;

  const BoundaryFunction& on(Side s) const { return s == Side::lower ? lower : upper; }

  std::string label() const { return lower.label() + " | " + upper.label(); }

  bool is_zero() const { return lower.is_zero() && upper.is_zero(); }
};

}  // namespace striplab
