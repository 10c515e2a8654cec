#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hazsim {

enum class HazardType { Radiation = 0, Temperature = 1, FlammableGas = 2 };

inline constexpr std::size_t kHazardCount = 3;
inline constexpr std::array<HazardType, kHazardCount> kAllHazards = {
    HazardType::Radiation, HazardType::Temperature, HazardType::FlammableGas};

constexpr std::size_t index_of(HazardType h) { return static_cast<std::size_t>(h); }

/// Per-hazard values indexed by index_of(HazardType).
template <typename T>
using PerHazard = std::array<T, kHazardCount>;

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Canonical display colors: radiation green, temperature red, gas blue.
constexpr Rgb display_color(HazardType h) {
  switch (h) {
    case HazardType::Radiation: return {0.0, 1.0, 0.0};
    case HazardType::Temperature: return {1.0, 0.0, 0.0};
    case HazardType::FlammableGas: return {0.0, 0.0, 1.0};
  }
  return {};
}

std::string_view to_string(HazardType h);
/// Accepts "radiation"/"rad", "temperature"/"temp", "gas"/"flammable_gas".
std::optional<HazardType> parse_hazard(std::string_view s);

template <typename Scalar>
struct HazardSphere {
  Eigen::Matrix<Scalar, 3, 1> center = Eigen::Matrix<Scalar, 3, 1>::Zero();
  Scalar radius = Scalar(1);
  Scalar peak = Scalar(1);
  HazardType hazard = HazardType::Radiation;

  /// Linear edge-to-centre contribution at `point` (unclamped).
  Scalar contribution(const Eigen::Matrix<Scalar, 3, 1>& point) const {
    const Scalar d = (point - center).norm();
    return peak * std::max(Scalar(0), Scalar(1) - d / radius);
  }
};

/// Typed hazard spheres. Same-type contributions add, then clamp at max_level.
template <typename Scalar>
class BasicHazardField {
 public:
  using Point = Eigen::Matrix<Scalar, 3, 1>;
  using Sphere = HazardSphere<Scalar>;

  static constexpr Scalar max_level = Scalar(1);

  BasicHazardField() = default;
  explicit BasicHazardField(std::vector<Sphere> spheres) : spheres_(std::move(spheres)) {
    for (const auto& s : spheres_) validate(s);
  }

  void add(const Sphere& s) {
    validate(s);
    spheres_.push_back(s);
  }

  const std::vector<Sphere>& spheres() const { return spheres_; }

  Scalar level_at(const Point& point, HazardType hazard) const {
    Scalar sum = 0;
    for (const auto& s : spheres_)
      if (s.hazard == hazard) sum += s.contribution(point);
    return std::min(max_level, sum);
  }

  PerHazard<Scalar> levels_at(const Point& point) const {
    PerHazard<Scalar> sums{};
    for (const auto& s : spheres_) sums[index_of(s.hazard)] += s.contribution(point);
    for (auto& v : sums) v = std::min(max_level, v);
    return sums;
  }

 private:
  static void validate(const Sphere& s) {
    if (!(s.radius > Scalar(0)))
      throw std::invalid_argument("hazard sphere radius must be positive");
    if (!(s.peak > Scalar(0) && s.peak <= Scalar(1)))
      throw std::invalid_argument("hazard sphere peak must lie in (0, 1]");
  }

  std::vector<Sphere> spheres_;
};

using HazardField = BasicHazardField<double>;

/// Ground-plane tiling. Tile (col,row) covers
/// [origin.x + col*tile, origin.x + (col+1)*tile) x [origin.y + row*tile, ...).
/// Sampling happens at `plane_height`.
struct GridSpec {
  int cols = 0;
  int rows = 0;
  double tile_size = 1.0;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double plane_height = 0.0;

  Eigen::Vector2d tile_center(int col, int row) const {
    return origin + tile_size * Eigen::Vector2d(col + 0.5, row + 0.5);
  }
  bool contains(int col, int row) const { return col >= 0 && row >= 0 && col < cols && row < rows; }
  int index(int col, int row) const { return row * cols + col; }
  int tile_count() const { return cols * rows; }
  void validate() const;
};

/// Per-type level table, rows x cols, entry (row, col).
using LevelTable = PerHazard<Eigen::ArrayXXd>;

/// Evaluates level_at at every tile centre.
template <typename Scalar>
PerHazard<Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>> rasterize(
    const BasicHazardField<Scalar>& field, const GridSpec& grid) {
  grid.validate();
  PerHazard<Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>> out;
  for (auto& t : out) t.setZero(grid.rows, grid.cols);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const Eigen::Vector2d xy = grid.tile_center(c, r);
      const typename BasicHazardField<Scalar>::Point p(Scalar(xy.x()), Scalar(xy.y()),
                                                       Scalar(grid.plane_height));
      const auto levels = field.levels_at(p);
      for (std::size_t h = 0; h < kHazardCount; ++h) out[h](r, c) = levels[h];
    }
  }
  return out;
}

}  // namespace hazsim
