#include "stcp/geodesic.hpp"

#include <cmath>
#include <string>

#include "stcp/errors.hpp"

namespace stcp {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSemiMajorM = 6378137.0;            // WGS84 a
constexpr double kFlattening = 1.0 / 298.257223563;  // WGS84 f
constexpr double kSemiMinorM = kSemiMajorM * (1.0 - kFlattening);

double deg2rad(double d) { return d * kPi / 180.0; }
} // namespace

double geodesic_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg) {
    if (!std::isfinite(lat1_deg) || !std::isfinite(lon1_deg) || !std::isfinite(lat2_deg) ||
        !std::isfinite(lon2_deg)) {
        throw domain_violation("geodesic: non-finite coordinate");
    }
    if (std::abs(lat1_deg) > 90.0 || std::abs(lat2_deg) > 90.0) {
        throw domain_violation("geodesic: latitude outside [-90, 90]: " +
                               std::to_string(std::abs(lat1_deg) > 90.0 ? lat1_deg : lat2_deg));
    }
    if (lat1_deg == lat2_deg && lon1_deg == lon2_deg) return 0.0;

    // Vincenty inverse formula.
    const double f = kFlattening;
    const double U1 = std::atan((1.0 - f) * std::tan(deg2rad(lat1_deg)));
    const double U2 = std::atan((1.0 - f) * std::tan(deg2rad(lat2_deg)));
    const double L = deg2rad(lon2_deg - lon1_deg);
    const double sinU1 = std::sin(U1), cosU1 = std::cos(U1);
    const double sinU2 = std::sin(U2), cosU2 = std::cos(U2);

    double lambda = L;
    double sinSigma = 0.0, cosSigma = 0.0, sigma = 0.0;
    double cosSqAlpha = 0.0, cos2SigmaM = 0.0;
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        const double sinLambda = std::sin(lambda), cosLambda = std::cos(lambda);
        const double t1 = cosU2 * sinLambda;
        const double t2 = cosU1 * sinU2 - sinU1 * cosU2 * cosLambda;
        sinSigma = std::sqrt(t1 * t1 + t2 * t2);
        if (sinSigma == 0.0) return 0.0; // coincident points
        cosSigma = sinU1 * sinU2 + cosU1 * cosU2 * cosLambda;
        sigma = std::atan2(sinSigma, cosSigma);
        const double sinAlpha = cosU1 * cosU2 * sinLambda / sinSigma;
        cosSqAlpha = 1.0 - sinAlpha * sinAlpha;
        cos2SigmaM = (cosSqAlpha != 0.0) ? cosSigma - 2.0 * sinU1 * sinU2 / cosSqAlpha
                                         : 0.0; // equatorial line
        const double C = f / 16.0 * cosSqAlpha * (4.0 + f * (4.0 - 3.0 * cosSqAlpha));
        const double lambdaPrev = lambda;
        lambda = L + (1.0 - C) * f * sinAlpha *
                         (sigma + C * sinSigma *
                                      (cos2SigmaM + C * cosSigma * (-1.0 + 2.0 * cos2SigmaM * cos2SigmaM)));
        if (std::abs(lambda - lambdaPrev) < 1e-12) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw numeric_error("geodesic: inverse iteration did not converge (nearly antipodal points?)");
    }

    const double uSq = cosSqAlpha * (kSemiMajorM * kSemiMajorM - kSemiMinorM * kSemiMinorM) /
                       (kSemiMinorM * kSemiMinorM);
    const double A = 1.0 + uSq / 16384.0 * (4096.0 + uSq * (-768.0 + uSq * (320.0 - 175.0 * uSq)));
    const double B = uSq / 1024.0 * (256.0 + uSq * (-128.0 + uSq * (74.0 - 47.0 * uSq)));
    const double deltaSigma =
        B * sinSigma *
        (cos2SigmaM + B / 4.0 *
                          (cosSigma * (-1.0 + 2.0 * cos2SigmaM * cos2SigmaM) -
                           B / 6.0 * cos2SigmaM * (-3.0 + 4.0 * sinSigma * sinSigma) *
                               (-3.0 + 4.0 * cos2SigmaM * cos2SigmaM)));
    const double meters = kSemiMinorM * A * (sigma - deltaSigma);
    return meters / 1000.0;
}

} // namespace stcp
