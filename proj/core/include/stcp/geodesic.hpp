#pragma once

namespace stcp {

// Shortest-path distance between two points on the WGS84 ellipsoid, in
// kilometers. Coordinates are geographic degrees. The inverse problem is
// solved iteratively to a longitude tolerance of 1e-12 rad, which gives
// sub-millimeter distances away from the nearly antipodal case.
//
// Throws domain_violation for latitudes outside [-90, 90] or non-finite
// coordinates, numeric_error if the iteration fails to converge.
double geodesic_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg);

} // namespace stcp
