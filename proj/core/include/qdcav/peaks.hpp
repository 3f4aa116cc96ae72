#ifndef QDCAV_PEAKS_HPP
#define QDCAV_PEAKS_HPP

#include <cstddef>
#include <vector>

#include "qdcav/leastsq.hpp"
#include "qdcav/spectrum.hpp"

namespace qdcav {

struct Peak {
    double center_ueV = 0.0;
    double fwhm_ueV = 0.0;
    double amplitude = 0.0;
    double center_uncertainty_ueV = 0.0;
    bool refined = false; // false when least-squares refinement did not converge
};

// Per-spectrum peak list, ordered by center.
struct PeakSet {
    std::vector<Peak> peaks;
};

/**
 * Local maxima above floor_frac * max(spectrum), jointly refined by a
 * multi-Lorentzian least-squares fit.  An empty set (flat spectrum, nothing
 * above the floor) is a valid result, not an error.
 */
PeakSet extract_peaks(const Spectrum& s, int max_peaks = 4, double floor_frac = 0.02);

// The joint refinement problem behind extract_peaks: parameters are
// (amplitude, center, fwhm) per peak, residuals one per grid point.  The
// spectrum is copied into the problem.
LeastSquaresProblem multi_lorentzian_problem(const Spectrum& s, std::size_t n_peaks);

/**
 * One branch of peak centers followed across the tuning axis by
 * nearest-neighbor continuation.  frame_index[i] pairs with peaks[i];
 * frames where the branch was not seen are simply absent.
 */
struct BranchTrack {
    std::vector<std::size_t> frame_index;
    std::vector<Peak> peaks;
};

// Continuation with a maximum per-step jump of 3x the inter-frame shift of
// the fastest branch (90th-percentile estimate); ties break toward
// preserving the energy ordering of branches.
std::vector<BranchTrack> track_branches(const std::vector<PeakSet>& frames);

enum class BranchId { plus_one, minus_one, degenerate };

struct AntiCrossing {
    double tuning_at_min = 0.0;
    double min_gap_ueV = 0.0;
    BranchId branch = BranchId::degenerate;
    // Set when the minimum gap fell below the resolution floor, i.e. the
    // lines cross rather than anti-cross.
    bool crossing_only = false;
};

struct DetectOptions {
    int max_peaks = 4;
    double floor_frac = 0.02;
    double resolution_floor_ueV = 27.0;
};

/**
 * Finds the minimum separation of the two nearest tracked branches.  The
 * minimum must be interior to the sweep; the sub-grid value is refined by a
 * parabolic fit through the three frames around it.  Throws
 * std::runtime_error("no anti-crossing found") when fewer than two branches
 * overlap or the gap has no interior minimum.
 */
AntiCrossing detect_anticrossing(const SweepMap& map, const DetectOptions& opt = {});

// All interior gap minima, sorted by tuning value.  On a temperature map
// taken at fixed B > 0 the first is labeled plus_one and the second
// minus_one; otherwise branches are degenerate.
std::vector<AntiCrossing> detect_anticrossings(const SweepMap& map, const DetectOptions& opt = {});

// Sub-map restricted to tuning values in [t_lo, t_hi].
SweepMap window_map(const SweepMap& map, double t_lo, double t_hi);

} // namespace qdcav

#endif
