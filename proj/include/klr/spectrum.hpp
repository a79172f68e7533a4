#pragma once

#include <string>
#include <variant>

#include "klr/types.hpp"

namespace klr {

/// Declarative synthetic singular value profiles. All generators return a
/// non-negative, descending vector of length n.
namespace spectra {

struct Exponential {  // sigma_i = alpha^{-i}
  double alpha = 1.1;
};
struct Polynomial {  // sigma_i = i^{-beta}
  double beta = 1.0;
};
/// [1, 1/(1+g), a^-1, a^-1/(1+g), ...]: consecutive pairs with relative gap g.
struct PairedGap {
  double alpha = 1.1;
  double gap = 1e-2;
};
/// Top `rank` values repeated in pairs (alpha^0..alpha^{-(rank/2-1)}), then a
/// single-valued exponential tail starting at alpha^{-(rank/2+1)}.
struct RepeatedPairs {
  double alpha = 1.005;
  Index rank = 50;
};
/// sigma_i = sqrt(1 - (i/n)²).
struct WishartLB {};
struct Explicit {
  Vector values;
};

}  // namespace spectra

struct SpectrumSpec {
  using Kind = std::variant<spectra::Exponential, spectra::Polynomial, spectra::PairedGap, spectra::RepeatedPairs,
                            spectra::WishartLB, spectra::Explicit>;
  Kind kind;
  Index n = 1000;

  /// Short stable label, e.g. "exponential(1.1)". Used as spectrum_id in CSVs.
  [[nodiscard]] std::string label() const;
};

Vector generate(const SpectrumSpec& spec);

}  // namespace klr
