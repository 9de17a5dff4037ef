#include "edof/optics.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fftw3.h>

namespace edof {
namespace {

// FFTW's planner is not thread-safe.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Fraction of fine bin `b` (unit width, centered on b) covered by [lo, hi].
double overlap(double lo, double hi, int b) {
  const double a = std::max(lo, b - 0.5);
  const double e = std::min(hi, b + 0.5);
  return e > a ? e - a : 0.0;
}

}  // namespace

void OpticsSpec::validate() const {
  if (!(aperture_radius > 0.0)) throw std::invalid_argument("aperture_radius must be > 0");
  for (double w : wavelengths) {
    if (!(w > 0.0)) throw std::invalid_argument("wavelengths must be > 0");
  }
  if (!(nominal_depth > 0.0)) throw std::invalid_argument("nominal_depth must be > 0");
  if (!(focal_length > 0.0)) throw std::invalid_argument("focal_length must be > 0");
  if (!(image_distance > 0.0)) throw std::invalid_argument("image_distance must be > 0");
  if (pupil_grid_size < 64) throw std::invalid_argument("pupil_grid_size must be >= 64");
  if (kernel_size < 3 || kernel_size % 2 == 0) {
    throw std::invalid_argument("kernel_size must be odd and >= 3");
  }
  if (!(pixel_pitch > 0.0)) throw std::invalid_argument("pixel_pitch must be > 0");
}

double OpticsSpec::focused_image_distance() const {
  return 1.0 / (1.0 / focal_length - 1.0 / nominal_depth);
}

double OpticsSpec::ideal_image_distance(double object_depth) const {
  if (!(object_depth > 0.0)) throw std::invalid_argument("object depth must be > 0");
  return 1.0 / (1.0 / focal_length - 1.0 / object_depth);
}

double OpticsSpec::cutoff_frequency(int channel) const {
  return 2.0 * aperture_radius / (wavelengths.at(static_cast<std::size_t>(channel)) * image_distance);
}

void PhaseMaskSpec::validate() const {
  double prev_outer = 0.0;
  for (const auto& r : rings) {
    if (!(r.inner >= 0.0 && r.inner < r.outer && r.outer <= 1.0)) {
      throw std::invalid_argument("mask ring radii must satisfy 0 <= inner < outer <= 1");
    }
    if (r.inner < prev_outer) {
      throw std::invalid_argument("mask rings must be sorted and non-overlapping");
    }
    prev_outer = r.outer;
  }
}

PhaseMaskSpec PhaseMaskSpec::standard() {
  using std::numbers::pi;
  PhaseMaskSpec m;
  m.rings.push_back({0.7, 1.0, {pi, pi / 2.0, pi / 4.0}});
  m.enabled = true;
  return m;
}

PhaseMaskSpec PhaseMaskSpec::clear() {
  PhaseMaskSpec m = standard();
  m.enabled = false;
  return m;
}

double PhaseMaskSpec::phase_at(double rho, int channel) const {
  if (!enabled) return 0.0;
  for (const auto& r : rings) {
    // The outermost ring includes the aperture edge.
    if (rho >= r.inner && (rho < r.outer || (r.outer >= 1.0 && rho <= 1.0))) {
      return r.phase[static_cast<std::size_t>(channel)];
    }
  }
  return 0.0;
}

BlurKernelSet BlurKernelSet::identity(std::vector<double> psi_grid, int kernel_size) {
  BlurKernelSet set;
  set.psi_grid = std::move(psi_grid);
  set.kernel_size = kernel_size;
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(kernel_size, kernel_size);
  delta(kernel_size / 2, kernel_size / 2) = 1.0;
  set.kernels.assign(set.psi_grid.size(), {delta, delta, delta});
  return set;
}

void BlurKernelSet::validate() const {
  if (psi_grid.empty()) throw std::invalid_argument("kernel set has an empty psi grid");
  if (kernels.size() != psi_grid.size()) {
    throw std::invalid_argument("kernel set size does not match psi grid");
  }
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw std::invalid_argument("kernel_size must be odd");
  }
  for (const auto& per_channel : kernels) {
    for (const auto& k : per_channel) {
      if (k.rows() != kernel_size || k.cols() != kernel_size) {
        throw std::invalid_argument("kernel dimensions do not match kernel_size");
      }
    }
  }
}

double defocus_psi(const OpticsSpec& spec, double object_depth, double wavelength) {
  if (!(object_depth > 0.0) || !(spec.nominal_depth > 0.0)) {
    throw std::invalid_argument("depths must be > 0");
  }
  if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be > 0");
  const double r = spec.aperture_radius;
  return std::numbers::pi * r * r / wavelength * (1.0 / object_depth - 1.0 / spec.nominal_depth);
}

Pupil pupil_function(const OpticsSpec& spec, const PhaseMaskSpec& mask, int channel) {
  spec.validate();
  mask.validate();
  if (channel < 0 || channel > 2) throw std::invalid_argument("channel must be 0, 1 or 2");
  const int n = spec.pupil_grid_size;
  Pupil pupil;
  // A radius of N/4 keeps the autocorrelation (the OTF support) inside the grid.
  pupil.radius_samples = n / 4.0;
  pupil.field = Eigen::MatrixXcd::Zero(n, n);
  const double center = n / 2.0;
  for (int row = 0; row < n; ++row) {
    const double y = (row - center) / pupil.radius_samples;
    for (int col = 0; col < n; ++col) {
      const double x = (col - center) / pupil.radius_samples;
      const double rho2 = x * x + y * y;
      if (rho2 > 1.0) continue;
      const double phase = mask.phase_at(std::sqrt(rho2), channel);
      pupil.field(row, col) = std::polar(1.0, phase);
    }
  }
  return pupil;
}

Eigen::MatrixXd psf_from_pupil(const Pupil& pupil, double psi, int kernel_size,
                               double pixel_pitch) {
  if (!std::isfinite(psi)) throw std::invalid_argument("psi must be finite");
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw std::invalid_argument("kernel_size must be odd");
  }
  if (!(pixel_pitch > 0.0)) throw std::invalid_argument("pixel_pitch must be > 0");
  const int n = pupil.grid_size();
  if (n < 2 || pupil.field.cols() != n) throw std::invalid_argument("pupil grid must be square");

  // One fine bin is 2 * radius / N diffraction units, so a pixel spans this many bins.
  const double bins_per_pixel = pixel_pitch * n / (2.0 * pupil.radius_samples);
  if (kernel_size * bins_per_pixel + 2.0 > n) {
    throw std::invalid_argument("kernel_size exceeds the computable diffraction field");
  }

  // Apply defocus, moving the aperture center to index 0 so the PSF peak lands at bin 0.
  std::vector<fftw_complex> buffer(static_cast<std::size_t>(n) * n);
  const double center = n / 2.0;
  for (int row = 0; row < n; ++row) {
    const double y = (row - center) / pupil.radius_samples;
    const int r_dst = (row + n - n / 2) % n;
    for (int col = 0; col < n; ++col) {
      const double x = (col - center) / pupil.radius_samples;
      const int c_dst = (col + n - n / 2) % n;
      std::complex<double> v = pupil.field(row, col);
      if (v != 0.0) v *= std::polar(1.0, psi * (x * x + y * y));
      auto& dst = buffer[static_cast<std::size_t>(r_dst) * n + c_dst];
      dst[0] = v.real();
      dst[1] = v.imag();
    }
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_plan plan = fftw_plan_dft_2d(n, n, buffer.data(), buffer.data(), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }

  // Intensity, shifted so the zero-frequency bin sits at (N/2, N/2).
  Eigen::MatrixXd intensity(n, n);
  for (int row = 0; row < n; ++row) {
    const int r_src = (row + n / 2) % n;
    for (int col = 0; col < n; ++col) {
      const int c_src = (col + n / 2) % n;
      const auto& v = buffer[static_cast<std::size_t>(r_src) * n + c_src];
      intensity(row, col) = v[0] * v[0] + v[1] * v[1];
    }
  }

  // Box integration over each sensor pixel, separable along rows and columns.
  const int half = kernel_size / 2;
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(kernel_size, n);
  for (int i = -half; i <= half; ++i) {
    const double lo = n / 2 + bins_per_pixel * (i - 0.5);
    const double hi = n / 2 + bins_per_pixel * (i + 0.5);
    const int first = std::max(0, static_cast<int>(std::floor(lo)) - 1);
    const int last = std::min(n - 1, static_cast<int>(std::ceil(hi)) + 1);
    for (int b = first; b <= last; ++b) weights(i + half, b) = overlap(lo, hi, b);
  }
  Eigen::MatrixXd kernel = weights * intensity * weights.transpose();
  const double total = kernel.sum();
  if (!(total > 0.0)) throw std::invalid_argument("pupil carries no energy");
  kernel /= total;
  return kernel;
}

BlurKernelSet build_kernel_set(const OpticsSpec& spec, const PhaseMaskSpec& mask,
                               const std::vector<double>& psi_grid) {
  spec.validate();
  mask.validate();
  if (psi_grid.empty()) throw std::invalid_argument("psi grid must be non-empty");
  for (std::size_t j = 1; j < psi_grid.size(); ++j) {
    if (!(psi_grid[j] > psi_grid[j - 1])) throw std::invalid_argument("psi grid must be ascending");
  }

  BlurKernelSet set;
  set.psi_grid = psi_grid;
  set.kernel_size = spec.kernel_size;
  set.kernels.resize(psi_grid.size());
  for (int c = 0; c < 3; ++c) {
    const Pupil pupil = pupil_function(spec, mask, c);
    const double scale = spec.reference_wavelength() / spec.wavelengths[static_cast<std::size_t>(c)];
    for (std::size_t j = 0; j < psi_grid.size(); ++j) {
      set.kernels[j][static_cast<std::size_t>(c)] =
          psf_from_pupil(pupil, psi_grid[j] * scale, spec.kernel_size, spec.pixel_pitch);
    }
  }
  return set;
}

std::vector<double> default_psi_grid() { return {1, 2, 3, 4, 5, 6, 7, 8}; }

}  // namespace edof
