#pragma once

#include <array>
#include <complex>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace edof {

/// Thin-lens imaging geometry and pupil/kernel sampling parameters.
///
/// Lengths are in meters. `pixel_pitch` is the sensor pixel pitch in units of
/// the diffraction scale 1/f_c = lambda * z_img / (2R) at the green wavelength.
struct OpticsSpec {
  double aperture_radius = 1.5e-3;
  std::array<double, 3> wavelengths{620e-9, 540e-9, 460e-9};
  double nominal_depth = 2.0;
  double focal_length = 25e-3;
  double image_distance = 25e-3 * 2.0 / (2.0 - 25e-3);
  int pupil_grid_size = 512;
  int kernel_size = 15;
  double pixel_pitch = 1.0;

  void validate() const;

  /// Sensor distance that focuses an object at `nominal_depth`.
  double focused_image_distance() const;
  /// Ideal image plane for an object at `object_depth`.
  double ideal_image_distance(double object_depth) const;
  /// Diffraction cutoff 2R / (lambda z_img) in cycles per meter.
  double cutoff_frequency(int channel) const;
  /// Wavelength the psi grid refers to; other channels see psi * lambda_ref / lambda_c.
  double reference_wavelength() const { return wavelengths[1]; }
};

/// Radially symmetric annular phase mask placed in the pupil.
struct PhaseMaskSpec {
  struct Ring {
    double inner = 0.0;
    double outer = 1.0;
    std::array<double, 3> phase{};
  };

  std::vector<Ring> rings;
  bool enabled = true;

  void validate() const;

  /// Single ring over [0.7, 1.0] of the pupil radius with phases (pi, pi/2, pi/4).
  static PhaseMaskSpec standard();
  static PhaseMaskSpec clear();

  /// Phase added at normalized pupil radius `rho` for `channel`.
  double phase_at(double rho, int channel) const;
};

struct Pupil {
  Eigen::MatrixXcd field;
  /// Pupil radius in grid samples; the aperture is centered at (N/2, N/2).
  double radius_samples = 0.0;

  int grid_size() const { return static_cast<int>(field.rows()); }
};

/// Per-channel, per-psi normalized blur kernels h^c_psi.
struct BlurKernelSet {
  std::vector<double> psi_grid;
  int kernel_size = 0;
  /// kernels[j][c] is the kernel for psi_grid[j] and channel c; (row, col) indexing.
  std::vector<std::array<Eigen::MatrixXd, 3>> kernels;

  int channel_count() const { return 3; }
  int psi_count() const { return static_cast<int>(psi_grid.size()); }
  const Eigen::MatrixXd& at(int channel, int psi_index) const {
    return kernels.at(static_cast<std::size_t>(psi_index))[static_cast<std::size_t>(channel)];
  }

  /// Delta kernels for every grid entry.
  static BlurKernelSet identity(std::vector<double> psi_grid, int kernel_size);

  void validate() const;
};

/// pi R^2 / lambda * (1/z_o - 1/z_n); positive for objects nearer than the focus plane.
double defocus_psi(const OpticsSpec& spec, double object_depth, double wavelength);

/// Complex pupil for `channel`: unit magnitude on the disk, ring phases applied.
Pupil pupil_function(const OpticsSpec& spec, const PhaseMaskSpec& mask, int channel);

/// Incoherent PSF |FT{P exp(i psi rho^2)}|^2 integrated over square pixels of
/// `pixel_pitch` diffraction units, cropped to kernel_size and renormalized.
Eigen::MatrixXd psf_from_pupil(const Pupil& pupil, double psi, int kernel_size,
                               double pixel_pitch = 1.0);

BlurKernelSet build_kernel_set(const OpticsSpec& spec, const PhaseMaskSpec& mask,
                               const std::vector<double>& psi_grid);

/// The grid {1, ..., 8}.
std::vector<double> default_psi_grid();

/// "EDKS" container.
void save_kernel_set(const BlurKernelSet& set, const std::filesystem::path& path);
BlurKernelSet load_kernel_set(const std::filesystem::path& path);

}  // namespace edof
