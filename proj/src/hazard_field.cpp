#include "hazsim/hazard_field.hpp"

#include <cmath>

namespace hazsim {

std::string_view to_string(HazardType h) {
  switch (h) {
    case HazardType::Radiation: return "radiation";
    case HazardType::Temperature: return "temperature";
    case HazardType::FlammableGas: return "gas";
  }
  return "unknown";
}

std::optional<HazardType> parse_hazard(std::string_view s) {
  if (s == "radiation" || s == "rad") return HazardType::Radiation;
  if (s == "temperature" || s == "temp") return HazardType::Temperature;
  if (s == "gas" || s == "flammable_gas" || s == "flammablegas") return HazardType::FlammableGas;
  return std::nullopt;
}

void GridSpec::validate() const {
  if (!(tile_size > 0.0) || !std::isfinite(tile_size))
    throw std::invalid_argument("grid tile size must be positive");
  if (cols <= 0 || rows <= 0) throw std::invalid_argument("grid must have at least one tile");
  if (!origin.allFinite() || !std::isfinite(plane_height))
    throw std::invalid_argument("grid origin must be finite");
}

}  // namespace hazsim
