#pragma once

// Boundary conversions. Everything inside the library is SI: meters,
// seconds, vehicles/meter, bits/second.

namespace v2i::units {

constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }
constexpr double mps_to_kmh(double mps) { return mps * 3.6; }
constexpr double per_km_to_per_m(double per_km) { return per_km / 1000.0; }
constexpr double per_m_to_per_km(double per_m) { return per_m * 1000.0; }
constexpr double us_to_s(double us) { return us * 1e-6; }
constexpr double s_to_us(double s) { return s * 1e6; }
constexpr double bytes_to_bits(double bytes) { return bytes * 8.0; }

}  // namespace v2i::units
