#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "advebm/density_grid.hpp"
#include "advebm/error.hpp"
#include "advebm/rng.hpp"
#include "advebm/tensor.hpp"

namespace advebm {

// Labeled dataset with inputs normalized to [-1,1]. Image inputs are stored
// flat in channel-planar order (CIFAR convention).
struct Dataset {
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::string source;
  // image geometry when applicable (dim == channels*height*width)
  std::size_t channels = 0, height = 0, width = 0;

  std::size_t size() const { return inputs.size(); }
  bool is_image() const { return channels > 0; }

  void validate() const {
    if (inputs.size() != labels.size()) throw ValueError("dataset: inputs/labels size mismatch");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (inputs[i].size() != dim) throw ShapeError("dataset", "entry " + std::to_string(i) + " has wrong dim");
      if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes)
        throw ValueError("dataset: label out of range at entry " + std::to_string(i));
      for (double v : inputs[i].data)
        if (!(v >= -1.0 && v <= 1.0))
          throw ValueError("dataset: input outside [-1,1] at entry " + std::to_string(i));
    }
  }
};

// ---------------------------------------------------------------------------
// CIFAR-10 binary batches: 3073-byte records, 1 label byte + 3072 pixel bytes
// in channel-planar R/G/B row-major order. Pixels map u8 -> [-1,1] via
// x = v/127.5 - 1.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kCifarRecordBytes = 3073;
inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarPixels = 3 * kCifarSide * kCifarSide;

inline double cifar_byte_to_unit(std::uint8_t v) { return static_cast<double>(v) / 127.5 - 1.0; }

inline std::uint8_t unit_to_byte(double x) {
  const double v = std::round((x + 1.0) * 127.5);
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

inline Dataset parse_cifar10(const std::uint8_t* bytes, std::size_t len, const std::string& origin) {
  if (len == 0 || len % kCifarRecordBytes != 0)
    throw FormatError("cifar10: '" + origin + "' size " + std::to_string(len) + " is not a multiple of " +
                      std::to_string(kCifarRecordBytes));
  Dataset ds;
  ds.dim = kCifarPixels;
  ds.num_classes = 10;
  ds.source = origin;
  ds.channels = 3;
  ds.height = kCifarSide;
  ds.width = kCifarSide;
  const std::size_t n = len / kCifarRecordBytes;
  ds.inputs.reserve(n);
  ds.labels.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::uint8_t* rec = bytes + r * kCifarRecordBytes;
    if (rec[0] > 9)
      throw FormatError("cifar10: '" + origin + "' record " + std::to_string(r) + " has invalid label " +
                        std::to_string(rec[0]));
    ds.labels.push_back(rec[0]);
    Tensor t({kCifarPixels});
    for (std::size_t i = 0; i < kCifarPixels; ++i) t[i] = cifar_byte_to_unit(rec[1 + i]);
    ds.inputs.push_back(std::move(t));
  }
  return ds;
}

// Inverse of parse: exact byte round trip for data produced by the parser.
inline std::vector<std::uint8_t> serialize_cifar10(const Dataset& ds) {
  if (ds.dim != kCifarPixels) throw ValueError("cifar10: dataset is not 32x32x3");
  std::vector<std::uint8_t> out;
  out.reserve(ds.size() * kCifarRecordBytes);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out.push_back(static_cast<std::uint8_t>(ds.labels[r]));
    for (std::size_t i = 0; i < kCifarPixels; ++i) out.push_back(unit_to_byte(ds.inputs[r][i]));
  }
  return out;
}

inline Dataset load_cifar10_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cifar10: cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_cifar10(bytes.data(), bytes.size(), path.filename().string());
}

// Loads every standard batch file present in `dir` (data_batch_1..5.bin and
// test_batch.bin). At least one must exist.
inline Dataset load_cifar10(const std::filesystem::path& dir) {
  static const std::array<const char*, 6> names = {"data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin",
                                                   "data_batch_4.bin", "data_batch_5.bin", "test_batch.bin"};
  Dataset all;
  bool any = false;
  for (const char* name : names) {
    const auto path = dir / name;
    if (!std::filesystem::exists(path)) continue;
    Dataset batch = load_cifar10_file(path);
    if (!any) {
      all = std::move(batch);
      any = true;
    } else {
      all.inputs.insert(all.inputs.end(), std::make_move_iterator(batch.inputs.begin()),
                        std::make_move_iterator(batch.inputs.end()));
      all.labels.insert(all.labels.end(), batch.labels.begin(), batch.labels.end());
    }
  }
  if (!any) throw IoError("cifar10: no batch files found in '" + dir.string() + "'");
  all.source = dir.string();
  return all;
}

// 32x32 -> 8x8 by 4x4 block averaging, per channel. Outputs stay in [-1,1].
inline Dataset downscale_cifar_to8(const Dataset& ds) {
  if (ds.channels != 3 || ds.height != kCifarSide || ds.width != kCifarSide)
    throw ValueError("downscale: dataset is not 3x32x32");
  Dataset out;
  out.dim = 3 * 8 * 8;
  out.num_classes = ds.num_classes;
  out.source = ds.source + ":8x8";
  out.channels = 3;
  out.height = 8;
  out.width = 8;
  out.labels = ds.labels;
  out.inputs.reserve(ds.size());
  for (const Tensor& img : ds.inputs) {
    Tensor t({out.dim});
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 0; x < 8; ++x) {
          double s = 0.0;
          for (std::size_t dy = 0; dy < 4; ++dy)
            for (std::size_t dx = 0; dx < 4; ++dx)
              s += img[c * kCifarSide * kCifarSide + (4 * y + dy) * kCifarSide + (4 * x + dx)];
          t[(c * 8 + y) * 8 + x] = s / 16.0;
        }
    out.inputs.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic 2D datasets with exact density oracles.
// ---------------------------------------------------------------------------

struct GaussComponent {
  std::array<double, 2> mean{};
  std::array<double, 4> cov{};  // row-major 2x2, positive definite

  void validate() const {
    const double a = cov[0], b = cov[1], c = cov[2], d = cov[3];
    if (std::abs(b - c) > 1e-12) throw ValueError("synth2d: covariance not symmetric");
    if (!(a > 0.0) || !(a * d - b * c > 0.0)) throw ValueError("synth2d: covariance not positive definite");
  }
};

// One noisy circular arc: center + radius * (cos t, sin t) + N(0, sigma^2 I),
// t uniform on [angle0, angle1].
struct RingComponent {
  std::array<double, 2> center{};
  double radius = 0.5;
  double sigma = 0.02;
  double angle0 = 0.0;
  double angle1 = 2.0 * std::numbers::pi;

  void validate() const {
    if (!(radius > 0.0) || !(sigma > 0.0)) throw ValueError("synth2d: ring needs positive radius and sigma");
    if (!(angle1 > angle0)) throw ValueError("synth2d: empty arc");
  }
};

struct Synth2DSpec {
  enum class Family { gauss_mixture, rings };
  Family family = Family::gauss_mixture;
  // gauss_mixture: per class, one or more equally weighted components
  std::vector<std::vector<GaussComponent>> gauss_classes;
  // rings: one arc per class
  std::vector<RingComponent> ring_classes;
  std::size_t points_per_class = 500;
  std::uint64_t seed = 1;

  std::size_t num_classes() const {
    return family == Family::gauss_mixture ? gauss_classes.size() : ring_classes.size();
  }

  void validate() const {
    if (num_classes() < 2) throw ValueError("synth2d: need at least 2 classes");
    if (points_per_class == 0) throw ValueError("synth2d: points_per_class must be positive");
    if (family == Family::gauss_mixture) {
      for (const auto& cls : gauss_classes) {
        if (cls.empty()) throw ValueError("synth2d: class with no components");
        for (const auto& comp : cls) comp.validate();
      }
    } else {
      for (const auto& ring : ring_classes) ring.validate();
    }
  }
};

// Exact class-conditional and marginal densities for a Synth2DSpec. Gaussian
// mixtures are closed-form; arcs integrate the angle numerically to machine
// precision. Classes are equiprobable.
class Density2D {
 public:
  explicit Density2D(Synth2DSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

  const Synth2DSpec& spec() const { return spec_; }
  std::size_t num_classes() const { return spec_.num_classes(); }

  double class_density(double x, double y, std::size_t cls) const {
    if (cls >= num_classes()) throw ValueError("density2d: class out of range");
    if (spec_.family == Synth2DSpec::Family::gauss_mixture) {
      const auto& comps = spec_.gauss_classes[cls];
      double p = 0.0;
      for (const auto& comp : comps) p += gauss_pdf(x, y, comp);
      return p / static_cast<double>(comps.size());
    }
    return arc_pdf(x, y, spec_.ring_classes[cls]);
  }

  double marginal_density(double x, double y) const {
    double p = 0.0;
    for (std::size_t k = 0; k < num_classes(); ++k) p += class_density(x, y, k);
    return p / static_cast<double>(num_classes());
  }

  // marginal density evaluated at cell centers, renormalized over the grid
  DensityGrid grid(double lo, double hi, std::size_t n) const {
    DensityGrid g;
    g.lo = lo;
    g.hi = hi;
    g.n = n;
    g.values.resize(n * n);
    double total = 0.0;
    for (std::size_t iy = 0; iy < n; ++iy)
      for (std::size_t ix = 0; ix < n; ++ix) {
        const double v = marginal_density(g.center(ix), g.center(iy));
        g.at(ix, iy) = v;
        total += v;
      }
    if (!(total > 0.0)) throw NumericError("density2d", "grid has zero total mass");
    const double norm = 1.0 / (total * g.cell_area());
    for (double& v : g.values) v *= norm;
    return g;
  }

 private:
  Synth2DSpec spec_;

  static double gauss_pdf(double x, double y, const GaussComponent& c) {
    const double dx = x - c.mean[0], dy = y - c.mean[1];
    const double a = c.cov[0], b = c.cov[1], d = c.cov[3];
    const double det = a * d - b * b;
    const double q = (d * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det;
    return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(det));
  }

  static double arc_pdf(double x, double y, const RingComponent& r) {
    // (1/(a1-a0)) * integral over t of N((x,y); center + radius*u(t), sigma^2 I)
    constexpr std::size_t kQuad = 512;
    const double span = r.angle1 - r.angle0;
    const double h = span / kQuad;
    const double inv2s2 = 1.0 / (2.0 * r.sigma * r.sigma);
    const double norm = 1.0 / (2.0 * std::numbers::pi * r.sigma * r.sigma);
    double acc = 0.0;
    for (std::size_t i = 0; i < kQuad; ++i) {
      const double t = r.angle0 + (static_cast<double>(i) + 0.5) * h;
      const double dx = x - (r.center[0] + r.radius * std::cos(t));
      const double dy = y - (r.center[1] + r.radius * std::sin(t));
      acc += std::exp(-(dx * dx + dy * dy) * inv2s2);
    }
    return norm * acc * h / span;
  }
};

// Seeded sampling: class-major order, one shared stream. Points are clamped
// to [-1,1] so the dataset invariant holds; specs should keep their mass
// well inside the box.
inline std::pair<Dataset, Density2D> make_synth2d(const Synth2DSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.dim = 2;
  ds.num_classes = spec.num_classes();
  ds.source = spec.family == Synth2DSpec::Family::gauss_mixture ? "synth2d:gauss_mixture" : "synth2d:rings";
  Rng rng(spec.seed);
  for (std::size_t cls = 0; cls < ds.num_classes; ++cls) {
    for (std::size_t i = 0; i < spec.points_per_class; ++i) {
      double x, y;
      if (spec.family == Synth2DSpec::Family::gauss_mixture) {
        const auto& comps = spec.gauss_classes[cls];
        const auto& c = comps.size() == 1 ? comps[0] : comps[rng.uniform_int(comps.size())];
        // Cholesky of the 2x2 covariance
        const double l11 = std::sqrt(c.cov[0]);
        const double l21 = c.cov[1] / l11;
        const double l22 = std::sqrt(c.cov[3] - l21 * l21);
        const double z1 = rng.normal(), z2 = rng.normal();
        x = c.mean[0] + l11 * z1;
        y = c.mean[1] + l21 * z1 + l22 * z2;
      } else {
        const auto& r = spec.ring_classes[cls];
        const double t = rng.uniform(r.angle0, r.angle1);
        x = r.center[0] + r.radius * std::cos(t) + r.sigma * rng.normal();
        y = r.center[1] + r.radius * std::sin(t) + r.sigma * rng.normal();
      }
      ds.inputs.push_back(Tensor({2}, {std::clamp(x, -1.0, 1.0), std::clamp(y, -1.0, 1.0)}));
      ds.labels.push_back(static_cast<int>(cls));
    }
  }
  return {std::move(ds), Density2D(spec)};
}

// ---------------------------------------------------------------------------
// CSV interchange for 2D datasets: "x1,x2,label" rows with a header line.
// ---------------------------------------------------------------------------

inline void save_csv_2d(const Dataset& ds, const std::filesystem::path& path) {
  if (ds.dim != 2) throw ValueError("csv: dataset is not 2D");
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw IoError("csv: cannot open '" + tmp + "'");
    f << "x1,x2,label\n";
    char buf[80];
    for (std::size_t i = 0; i < ds.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", ds.inputs[i][0], ds.inputs[i][1], ds.labels[i]);
      f << buf;
    }
    if (!f) throw IoError("csv: write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline Dataset load_csv_2d(const std::filesystem::path& path, std::size_t num_classes = 0) {
  std::ifstream f(path);
  if (!f) throw IoError("csv: cannot open '" + path.string() + "'");
  Dataset ds;
  ds.dim = 2;
  ds.source = path.string();
  std::string line;
  if (!std::getline(f, line)) throw FormatError("csv: '" + path.string() + "' is empty");
  if (line != "x1,x2,label" && line != "x1,x2")
    throw FormatError("csv: '" + path.string() + "' has unexpected header '" + line + "'");
  const bool labeled = line == "x1,x2,label";
  int max_label = -1;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    double x, y;
    char c1, c2;
    int label = 0;
    if (labeled ? !(ss >> x >> c1 >> y >> c2 >> label) : !(ss >> x >> c1 >> y))
      throw FormatError("csv: parse error at line " + std::to_string(lineno) + " of '" + path.string() + "'");
    ds.inputs.push_back(Tensor({2}, {x, y}));
    ds.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  ds.num_classes = num_classes ? num_classes : static_cast<std::size_t>(max_label + 1);
  return ds;
}

}  // namespace advebm
