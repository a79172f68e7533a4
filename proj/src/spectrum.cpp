#include "klr/spectrum.hpp"

#include <cmath>
#include <cstdio>

namespace klr {

namespace {

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Generator {
  Index n;

  Vector operator()(const spectra::Exponential& s) const {
    require(s.alpha > 1.0, "exponential decay needs alpha > 1");
    Vector out(n);
    for (Index i = 0; i < n; ++i) out[i] = std::pow(s.alpha, -static_cast<double>(i + 1));
    return out;
  }

  Vector operator()(const spectra::Polynomial& s) const {
    require(s.beta > 0.0, "polynomial decay needs beta > 0");
    Vector out(n);
    for (Index i = 0; i < n; ++i) out[i] = std::pow(static_cast<double>(i + 1), -s.beta);
    return out;
  }

  Vector operator()(const spectra::PairedGap& s) const {
    require(s.alpha > 1.0, "paired-gap spectrum needs alpha > 1");
    require(s.gap >= 0.0 && std::isfinite(s.gap), "paired-gap spectrum needs gap >= 0");
    require(n % 2 == 0, "paired-gap spectrum needs even n");
    Vector out(n);
    for (Index j = 0; j < n / 2; ++j) {
      const double top = std::pow(s.alpha, -static_cast<double>(j));
      out[2 * j] = top;
      out[2 * j + 1] = top / (1.0 + s.gap);
    }
    return out;
  }

  Vector operator()(const spectra::RepeatedPairs& s) const {
    require(s.alpha > 1.0, "repeated-pairs spectrum needs alpha > 1");
    require(s.rank >= 2 && s.rank % 2 == 0, "repeated-pairs spectrum needs an even rank >= 2");
    require(n >= s.rank, "repeated-pairs spectrum needs n >= rank");
    Vector out(n);
    const Index pairs = s.rank / 2;
    for (Index j = 0; j < pairs; ++j) {
      const double v = std::pow(s.alpha, -static_cast<double>(j));
      out[2 * j] = v;
      out[2 * j + 1] = v;
    }
    for (Index i = s.rank; i < n; ++i)
      out[i] = std::pow(s.alpha, -static_cast<double>(pairs + 1 + (i - s.rank)));
    return out;
  }

  Vector operator()(const spectra::WishartLB&) const {
    Vector out(n);
    const auto dn = static_cast<double>(n);
    for (Index i = 0; i < n; ++i) {
      const double r = static_cast<double>(i + 1) / dn;
      out[i] = std::sqrt(std::max(0.0, 1.0 - r * r));
    }
    return out;
  }

  Vector operator()(const spectra::Explicit& s) const {
    require(s.values.size() == n, "explicit spectrum length must equal n");
    require(s.values.allFinite() && (s.values.array() >= 0.0).all(), "explicit spectrum must be finite and >= 0");
    for (Index i = 1; i < n; ++i)
      require(s.values[i] <= s.values[i - 1], "explicit spectrum must be sorted descending");
    return s.values;
  }
};

struct Labeler {
  std::string operator()(const spectra::Exponential& s) const { return "exponential(" + format_param(s.alpha) + ")"; }
  std::string operator()(const spectra::Polynomial& s) const { return "polynomial(" + format_param(s.beta) + ")"; }
  std::string operator()(const spectra::PairedGap& s) const {
    return "paired_gap(" + format_param(s.alpha) + "," + format_param(s.gap) + ")";
  }
  std::string operator()(const spectra::RepeatedPairs& s) const {
    return "repeated_pairs(" + format_param(s.alpha) + "," + std::to_string(s.rank) + ")";
  }
  std::string operator()(const spectra::WishartLB&) const { return "wishart_lb"; }
  std::string operator()(const spectra::Explicit&) const { return "explicit"; }
};

}  // namespace

std::string SpectrumSpec::label() const { return std::visit(Labeler{}, kind); }

Vector generate(const SpectrumSpec& spec) {
  require(spec.n >= 1, "spectrum dimension must be positive");
  return std::visit(Generator{spec.n}, spec.kind);
}

}  // namespace klr
