#pragma once

#include <map>
#include <string>
#include <string_view>

namespace tafp {

struct Material {
  std::string name;
  double k_W_per_mK = 0.0;
  double k_quad_W_per_mK2 = 0.0;  // slope of k(T) around the reference temperature
  double c_vol_J_per_m3K = 0.0;

  /// k(T) = k + k_quad * (T - reference), floored at 1% of k.
  double conductivity(double temperature_K, double reference_K) const;
};

/// Material lookup by name. The thermal assembler requires the entries named
/// in materials::kRequired.
class MaterialTable {
 public:
  MaterialTable() = default;

  void set(Material m);
  /// Throws Error(kUnknownMaterial).
  const Material& at(std::string_view name) const;
  bool contains(std::string_view name) const;
  const std::map<std::string, Material, std::less<>>& all() const { return entries_; }

  /// Throws Error(kUnknownMaterial) if a required entry is missing or invalid.
  void validate() const;

 private:
  std::map<std::string, Material, std::less<>> entries_;
};

namespace materials {

inline constexpr std::string_view kSilicon = "silicon";
inline constexpr std::string_view kOxide = "sio2";
inline constexpr std::string_view kEpoxy = "epoxy";
inline constexpr std::string_view kTsv = "tsv";
inline constexpr std::string_view kAir = "air";
inline constexpr std::string_view kWater = "water";

inline constexpr std::string_view kRequired[] = {kSilicon, kOxide, kEpoxy, kTsv, kAir, kWater};

/// Table of the reference material properties (conductivities in W/(mK),
/// volumetric heat capacities in J/(m^3 K)).
MaterialTable reference_table();

}  // namespace materials

}  // namespace tafp
