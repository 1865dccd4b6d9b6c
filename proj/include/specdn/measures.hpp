#pragma once

#include <complex>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace specdn::measures {

struct Atom {
  double location;
  double weight;
};

/// A probability measure made of finitely many point masses on [0, inf).
///
/// Canonical form: locations strictly increasing, atoms closer than 1e-12
/// relative to the largest location merged, weights nonnegative and summing
/// to one within 1e-12. Immutable after construction.
class DiscreteMeasure {
 public:
  /// Validates and canonicalizes. Throws specdn::Error on negative
  /// locations or weights, non-finite values, an empty list, or a weight sum
  /// off by more than 1e-12.
  static DiscreteMeasure from_atoms(std::vector<Atom> atoms);

  /// Equal-weight atoms (1/size each); used for empirical spectra.
  static DiscreteMeasure uniform(std::span<const double> locations);

  static DiscreteMeasure point_mass(double location);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  double min_location() const noexcept { return atoms_.front().location; }
  double max_location() const noexcept { return atoms_.back().location; }
  double mean() const noexcept;

 private:
  explicit DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}
  std::vector<Atom> atoms_;
};

/// ESD of a symmetric PSD matrix from its eigenvalues. Eigenvalues in
/// [-1e-10 * max|lambda|, 0) are clamped to zero; anything more negative is
/// rejected.
DiscreteMeasure esd_from_eigenvalues(std::span<const double> eigenvalues, std::size_t dim);

/// m(z) = sum_k w_k / (x_k - z); requires Im z > 0.
std::complex<double> stieltjes(const DiscreteMeasure& measure, std::complex<double> z);

/// Right-continuous distribution function.
double cdf_eval(const DiscreteMeasure& measure, double x) noexcept;

double kolmogorov_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) noexcept;

/// Integral of |F_a - F_b| over the real line.
double wasserstein1_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) noexcept;

/// Atoms moved to c * x_k.
DiscreteMeasure scale_measure(const DiscreteMeasure& measure, double c);

/// min over c > 0 of kolmogorov_distance(scale_measure(a, c), b). The distance
/// is piecewise constant in c, so it suffices to probe every location ratio
/// and the midpoints between consecutive ratios.
double best_scaled_kolmogorov_distance(const DiscreteMeasure& a, const DiscreteMeasure& b);

// CSV with header `location,weight`, 17 significant digits, LF endings.
void write_csv(const DiscreteMeasure& measure, const std::filesystem::path& path);
std::string to_csv(const DiscreteMeasure& measure);
DiscreteMeasure read_csv(const std::filesystem::path& path);

}  // namespace specdn::measures
