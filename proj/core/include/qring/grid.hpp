#pragma once

#include <cstddef>
#include <vector>

namespace qring {

/// Square Cartesian domain [-L, L]^2 with cell-centred nodes
/// x_i = -L + (i + 1/2) dx, so the origin is never a node.
struct GridSpec {
  int nx = 256;
  int ny = 256;
  double extent = 250.0;          // half-width L, nm
  double dt = 0.5;                // fs
  double duration = 15.0;         // ps
  double absorber_width = 0.0;    // nm, 0 disables the mask

  void validate() const;
  [[nodiscard]] double dx() const { return 2.0 * extent / nx; }
  [[nodiscard]] double dy() const { return 2.0 * extent / ny; }
  [[nodiscard]] double dt_ps() const;
  [[nodiscard]] long n_steps() const;
  [[nodiscard]] std::size_t points() const { return static_cast<std::size_t>(nx) * ny; }
  [[nodiscard]] double x(int i) const { return -extent + (i + 0.5) * dx(); }
  [[nodiscard]] double y(int j) const { return -extent + (j + 0.5) * dy(); }
};

/// Precomputed node coordinates, row-major with x fastest: index = j*nx + i.
class Grid2D {
 public:
  explicit Grid2D(const GridSpec& spec);

  [[nodiscard]] const GridSpec& spec() const { return spec_; }
  [[nodiscard]] std::size_t size() const { return rho_.size(); }
  [[nodiscard]] double cell_area() const { return spec_.dx() * spec_.dy(); }
  [[nodiscard]] const std::vector<double>& x() const { return x_; }
  [[nodiscard]] const std::vector<double>& y() const { return y_; }
  [[nodiscard]] const std::vector<double>& rho() const { return rho_; }
  [[nodiscard]] const std::vector<double>& phi() const { return phi_; }

  /// Fraction of each cell's area inside rho_lo <= rho <= rho_hi, by
  /// `oversample`^2 sub-cell sampling.
  [[nodiscard]] std::vector<double> annulus_weights(double rho_lo, double rho_hi, int oversample = 8) const;

  /// Cosine-ramp absorbing mask: 1 in the interior, falling to 0 at the
  /// boundary over `absorber_width`. All ones if the width is zero.
  [[nodiscard]] std::vector<double> absorber_mask() const;

 private:
  GridSpec spec_;
  std::vector<double> x_, y_, rho_, phi_;
};

}  // namespace qring
