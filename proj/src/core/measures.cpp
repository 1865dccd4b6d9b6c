#include "specdn/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "specdn/error.hpp"

namespace specdn::measures {

namespace {

constexpr double kMergeTolerance = 1e-12;
constexpr double kWeightSumTolerance = 1e-12;
constexpr double kNegativeEigenTolerance = 1e-10;

}  // namespace

DiscreteMeasure DiscreteMeasure::from_atoms(std::vector<Atom> atoms) {
  if (atoms.empty()) fail(ErrorCode::invalid_argument, "empty spectrum");
  double total = 0.0;
  double scale = 0.0;
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.location) || !std::isfinite(a.weight))
      fail(ErrorCode::invalid_argument, "measure atoms must be finite");
    if (a.location < 0.0) fail(ErrorCode::invalid_argument, "measure atom at a negative location");
    if (a.weight < 0.0) fail(ErrorCode::invalid_argument, "measure atom with negative weight");
    total += a.weight;
    scale = std::max(scale, a.location);
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance)
    fail(ErrorCode::invalid_argument, "measure weights do not sum to one");

  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& l, const Atom& r) { return l.location < r.location; });
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  const double tol = kMergeTolerance * scale;
  for (const Atom& a : atoms) {
    if (!merged.empty() && a.location - merged.back().location <= tol) {
      merged.back().weight += a.weight;
    } else {
      merged.push_back(a);
    }
  }
  return DiscreteMeasure(std::move(merged));
}

DiscreteMeasure DiscreteMeasure::uniform(std::span<const double> locations) {
  std::vector<Atom> atoms;
  atoms.reserve(locations.size());
  const double w = 1.0 / static_cast<double>(locations.size());
  for (double x : locations) atoms.push_back({x, w});
  // Summation error on p equal weights is far below the tolerance, but the
  // sum is not exactly one; rescale the last weight to absorb it.
  if (!atoms.empty()) {
    double partial = 0.0;
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) partial += atoms[i].weight;
    atoms.back().weight = 1.0 - partial;
  }
  return from_atoms(std::move(atoms));
}

DiscreteMeasure DiscreteMeasure::point_mass(double location) {
  return from_atoms({{location, 1.0}});
}

double DiscreteMeasure::mean() const noexcept {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.weight * a.location;
  return m;
}

DiscreteMeasure esd_from_eigenvalues(std::span<const double> eigenvalues, std::size_t dim) {
  if (eigenvalues.empty()) fail(ErrorCode::invalid_argument, "empty spectrum");
  require(eigenvalues.size() == dim, "eigenvalue count does not match the dimension");
  double norm = 0.0;
  for (double v : eigenvalues) norm = std::max(norm, std::abs(v));
  std::vector<double> clamped(eigenvalues.begin(), eigenvalues.end());
  for (double& v : clamped) {
    if (v < 0.0) {
      if (v < -kNegativeEigenTolerance * norm)
        fail(ErrorCode::invalid_argument, "matrix is not positive semidefinite");
      v = 0.0;
    }
  }
  return DiscreteMeasure::uniform(clamped);
}

std::complex<double> stieltjes(const DiscreteMeasure& measure, std::complex<double> z) {
  if (!(z.imag() > 0.0)) fail(ErrorCode::domain, "lower half-plane");
  std::complex<double> sum{0.0, 0.0};
  for (const Atom& a : measure.atoms()) sum += a.weight / (a.location - z);
  return sum;
}

double cdf_eval(const DiscreteMeasure& measure, double x) noexcept {
  double acc = 0.0;
  for (const Atom& a : measure.atoms()) {
    if (a.location > x) break;
    acc += a.weight;
  }
  return std::min(acc, 1.0);
}

namespace {

// Walks the union of atom locations; visit(x, F_a(x), F_b(x)) at each.
template <typename Visit>
void sweep(const DiscreteMeasure& a, const DiscreteMeasure& b, Visit visit) {
  auto ia = a.atoms().begin();
  auto ib = b.atoms().begin();
  double fa = 0.0, fb = 0.0;
  while (ia != a.atoms().end() || ib != b.atoms().end()) {
    double x;
    if (ib == b.atoms().end() || (ia != a.atoms().end() && ia->location <= ib->location)) {
      x = ia->location;
    } else {
      x = ib->location;
    }
    while (ia != a.atoms().end() && ia->location == x) fa += (ia++)->weight;
    while (ib != b.atoms().end() && ib->location == x) fb += (ib++)->weight;
    visit(x, fa, fb);
  }
}

}  // namespace

double kolmogorov_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) noexcept {
  // Left limits at each location equal the right values at the previous
  // union location, so the right values cover both one-sided limits.
  double best = 0.0;
  sweep(a, b, [&](double, double fa, double fb) { best = std::max(best, std::abs(fa - fb)); });
  return std::min(best, 1.0);
}

double wasserstein1_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) noexcept {
  double total = 0.0;
  double prev_x = 0.0, prev_gap = 0.0;
  bool first = true;
  sweep(a, b, [&](double x, double fa, double fb) {
    if (!first) total += prev_gap * (x - prev_x);
    first = false;
    prev_x = x;
    prev_gap = std::abs(fa - fb);
  });
  return total;
}

DiscreteMeasure scale_measure(const DiscreteMeasure& measure, double c) {
  require(c > 0.0 && std::isfinite(c), "scale factor must be positive");
  std::vector<Atom> atoms(measure.atoms().begin(), measure.atoms().end());
  for (Atom& a : atoms) a.location *= c;
  return DiscreteMeasure::from_atoms(std::move(atoms));
}

double best_scaled_kolmogorov_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  std::vector<double> ratios;
  for (const Atom& xa : a.atoms()) {
    if (xa.location <= 0.0) continue;
    for (const Atom& xb : b.atoms()) {
      if (xb.location > 0.0) ratios.push_back(xb.location / xa.location);
    }
  }
  if (ratios.empty()) return kolmogorov_distance(a, b);
  std::sort(ratios.begin(), ratios.end());
  ratios.erase(std::unique(ratios.begin(), ratios.end()), ratios.end());

  std::vector<double> probes;
  probes.reserve(2 * ratios.size() + 2);
  probes.push_back(ratios.front() * 0.5);
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    probes.push_back(ratios[i]);
    if (i + 1 < ratios.size()) probes.push_back(0.5 * (ratios[i] + ratios[i + 1]));
  }
  probes.push_back(ratios.back() * 2.0);

  double best = 1.0;
  for (double c : probes) best = std::min(best, kolmogorov_distance(scale_measure(a, c), b));
  return best;
}

std::string to_csv(const DiscreteMeasure& measure) {
  std::string out = "location,weight\n";
  char line[96];
  for (const Atom& a : measure.atoms()) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", a.location, a.weight);
    out += line;
  }
  return out;
}

void write_csv(const DiscreteMeasure& measure, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
  os << to_csv(measure);
  if (!os) fail(ErrorCode::io, "failed writing " + path.string());
}

DiscreteMeasure read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "location,weight")
    fail(ErrorCode::io, path.string() + ": expected header location,weight");
  std::vector<Atom> atoms;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorCode::io, path.string() + ": malformed row");
    atoms.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return DiscreteMeasure::from_atoms(std::move(atoms));
}

}  // namespace specdn::measures
