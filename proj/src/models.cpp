#include "cbdep/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "cbdep/errors.hpp"
#include "cbdep/numeric.hpp"
#include "cbdep/rng.hpp"

namespace cbdep {

namespace {

double parse_param(const std::string& text, const std::string& descriptor) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw InputError("bad parameter in model descriptor '" + descriptor + "'");
  }
  return v;
}

}  // namespace

CopulaModel::CopulaModel(Family family, double a, double b) : family_(family), a_(a), b_(b) {
  switch (family_) {
    case Family::Independence:
      descriptor_ = "indep";
      break;
    case Family::Comonotone:
      descriptor_ = "como";
      break;
    case Family::Countermonotone:
      descriptor_ = "counter";
      break;
    case Family::MarshallOlkin:
      descriptor_ = "mo:" + format_double(a_) + "," + format_double(b_);
      break;
    case Family::Fgm:
      descriptor_ = "fgm:" + format_double(a_);
      break;
    case Family::Frechet:
      descriptor_ = "frechet:" + format_double(a_);
      break;
  }
}

CopulaModel CopulaModel::independence() { return CopulaModel(Family::Independence, 0, 0); }
CopulaModel CopulaModel::comonotone() { return CopulaModel(Family::Comonotone, 0, 0); }
CopulaModel CopulaModel::countermonotone() { return CopulaModel(Family::Countermonotone, 0, 0); }

CopulaModel CopulaModel::marshall_olkin(double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0)) {
    throw InputError("Marshall-Olkin parameters must lie in [0,1]");
  }
  return CopulaModel(Family::MarshallOlkin, alpha, beta);
}

CopulaModel CopulaModel::fgm(double theta) {
  if (!(theta >= -1.0 && theta <= 1.0)) {
    throw InputError("FGM parameter must lie in [-1,1]");
  }
  return CopulaModel(Family::Fgm, theta, 0);
}

CopulaModel CopulaModel::frechet(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InputError("Frechet mixture weight must lie in [0,1]");
  }
  return CopulaModel(Family::Frechet, alpha, 0);
}

CopulaModel CopulaModel::parse(const std::string& descriptor) {
  if (descriptor == "indep") return independence();
  if (descriptor == "como") return comonotone();
  if (descriptor == "counter") return countermonotone();
  const auto colon = descriptor.find(':');
  if (colon != std::string::npos) {
    const std::string head = descriptor.substr(0, colon);
    const std::string tail = descriptor.substr(colon + 1);
    if (head == "mo") {
      const auto comma = tail.find(',');
      if (comma == std::string::npos) {
        throw InputError("mo descriptor needs two parameters: mo:A,B");
      }
      return marshall_olkin(parse_param(tail.substr(0, comma), descriptor),
                            parse_param(tail.substr(comma + 1), descriptor));
    }
    if (head == "fgm") return fgm(parse_param(tail, descriptor));
    if (head == "frechet") return frechet(parse_param(tail, descriptor));
  }
  throw InputError("unknown model descriptor '" + descriptor +
                   "' (expected indep, como, counter, mo:A,B, fgm:T or frechet:A)");
}

double CopulaModel::cdf(double u, double v) const {
  u = std::clamp(u, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;
  switch (family_) {
    case Family::Independence:
      return u * v;
    case Family::Comonotone:
      return std::min(u, v);
    case Family::Countermonotone:
      return std::max(u + v - 1.0, 0.0);
    case Family::MarshallOlkin: {
      if (std::pow(u, a_) >= std::pow(v, b_)) {
        return std::pow(u, 1.0 - a_) * v;
      }
      return u * std::pow(v, 1.0 - b_);
    }
    case Family::Fgm:
      return u * v + a_ * u * (1.0 - u) * v * (1.0 - v);
    case Family::Frechet:
      return a_ * std::min(u, v) + (1.0 - a_) * u * v;
  }
  return 0.0;
}

std::vector<std::pair<double, double>> CopulaModel::sample(int n, std::uint64_t seed) const {
  if (n < 1) throw InputError("sample size must be >= 1");
  Rng rng(seed);
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  switch (family_) {
    case Family::Independence:
      for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        const double v = rng.uniform01();
        out.emplace_back(u, v);
      }
      break;
    case Family::Comonotone:
      for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        out.emplace_back(u, u);
      }
      break;
    case Family::Countermonotone:
      for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        out.emplace_back(u, 1.0 - u);
      }
      break;
    case Family::MarshallOlkin: {
      for (int i = 0; i < n; ++i) {
        const double r = rng.uniform01();
        const double s = rng.uniform01();
        const double t = rng.uniform01();
        double u, v;
        if (a_ == 0.0) {
          u = r;
        } else if (a_ == 1.0) {
          u = t;
        } else {
          u = std::max(std::pow(r, 1.0 / (1.0 - a_)), std::pow(t, 1.0 / a_));
        }
        if (b_ == 0.0) {
          v = s;
        } else if (b_ == 1.0) {
          v = t;
        } else {
          v = std::max(std::pow(s, 1.0 / (1.0 - b_)), std::pow(t, 1.0 / b_));
        }
        out.emplace_back(u, v);
      }
      break;
    }
    case Family::Fgm: {
      for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        const double w = rng.uniform01();
        const double a = a_ * (1.0 - 2.0 * u);
        double v;
        if (std::abs(a) < 1e-12) {
          v = w;
        } else {
          // Conditional kernel v + a*v*(1-v) = w, solved for the root in
          // [0,1]; rationalized form keeps it stable for small a.
          const double disc = (1.0 + a) * (1.0 + a) - 4.0 * a * w;
          v = 2.0 * w / ((1.0 + a) + std::sqrt(disc));
        }
        out.emplace_back(u, v);
      }
      break;
    }
    case Family::Frechet: {
      for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        const double coin = rng.uniform01();
        if (coin < a_) {
          out.emplace_back(u, u);
        } else {
          out.emplace_back(u, rng.uniform01());
        }
      }
      break;
    }
  }
  return out;
}

CheckerboardCopula aggregate(const CopulaModel& model, int resolution) {
  return aggregate_cdf([&](double u, double v) { return model.cdf(u, v); }, resolution);
}

TrueValue true_lambda(const CopulaModel& model, const ConvexFunction& f, int n_fine,
                      EvalPath path) {
  if (n_fine < 128 || (n_fine & (n_fine - 1)) != 0) {
    throw InputError("n_fine must be a power of two >= 128");
  }
  const double fine = lambda_phi(aggregate(model, n_fine), f, path).value;
  const double coarse = lambda_phi(aggregate(model, n_fine / 2), f, path).value;
  TrueValue tv;
  tv.value = fine;
  tv.error_estimate = std::abs(fine - coarse);
  tv.converged = tv.error_estimate <= 1e-2;
  return tv;
}

}  // namespace cbdep
