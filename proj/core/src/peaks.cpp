#include "qdcav/peaks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace qdcav {

namespace {

struct Seed {
    std::size_t index;
    double center;
    double amplitude;
    double fwhm;
};

std::vector<Seed> find_seeds(const Spectrum& s, int max_peaks, double floor_frac) {
    const auto& x = s.energies_ueV;
    const auto& y = s.intensities;
    const std::size_t n = y.size();
    std::vector<Seed> seeds;
    if (n < 3) return seeds;

    // Seed on a lightly smoothed copy: noise wiggles on a broad peak top
    // otherwise spawn near-duplicate maxima that make the joint refinement
    // degenerate.  The raw data stay untouched for the fit itself.
    std::vector<double> ys(n);
    constexpr std::ptrdiff_t r_smooth = 3;
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        double acc = 0.0;
        int cnt = 0;
        for (std::ptrdiff_t k = i - r_smooth; k <= i + r_smooth; ++k) {
            if (k < 0 || k >= static_cast<std::ptrdiff_t>(n)) continue;
            acc += y[k];
            ++cnt;
        }
        ys[i] = acc / cnt;
    }

    const double y_max = *std::max_element(ys.begin(), ys.end());
    if (!(y_max > 0.0)) return seeds;
    const double floor = floor_frac * y_max;
    const double grid_step = x[1] - x[0];

    std::vector<Seed> raw;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (ys[i] < floor) continue;
        if (!(ys[i] > ys[i - 1])) continue;
        std::size_t j = i;
        while (j + 1 < n && ys[j + 1] == ys[i]) ++j;
        if (j + 1 >= n || !(ys[i] > ys[j + 1])) continue;

        Seed seed;
        seed.index = i;
        seed.center = x[i];
        seed.amplitude = y[i];
        // width estimate from the half-maximum crossings
        const double half = ys[i] / 2.0;
        std::size_t l = i;
        while (l > 0 && ys[l] > half) --l;
        std::size_t r = j;
        while (r + 1 < n && ys[r] > half) ++r;
        seed.fwhm = std::max(x[r] - x[l], 2.0 * grid_step);
        raw.push_back(seed);
        i = j;
    }

    // Strongest first; a candidate only counts as a separate peak if the
    // smoothed spectrum dips at least 2% of the global maximum below it on
    // the way to every already-accepted seed.  Noise ripples on a peak top
    // or on a Lorentzian tail carve no such valley; resolvable neighbors do.
    std::sort(raw.begin(), raw.end(),
              [](const Seed& a, const Seed& b) { return a.amplitude > b.amplitude; });
    for (const Seed& cand : raw) {
        bool dup = false;
        for (const Seed& kept : seeds) {
            const std::size_t lo = std::min(cand.index, kept.index);
            const std::size_t hi = std::max(cand.index, kept.index);
            double valley = ys[lo];
            for (std::size_t i = lo; i <= hi; ++i) valley = std::min(valley, ys[i]);
            if (valley > std::min(ys[cand.index], ys[kept.index]) - 0.02 * y_max) {
                dup = true;
                break;
            }
        }
        if (!dup) seeds.push_back(cand);
        if (static_cast<int>(seeds.size()) >= max_peaks) break;
    }
    std::sort(seeds.begin(), seeds.end(),
              [](const Seed& a, const Seed& b) { return a.center < b.center; });
    return seeds;
}

} // namespace

LeastSquaresProblem multi_lorentzian_problem(const Spectrum& s, std::size_t n_peaks) {
    const auto energies = std::make_shared<std::vector<double>>(s.energies_ueV);
    const auto targets = std::make_shared<std::vector<double>>(s.intensities);
    const std::size_t m = energies->size();
    const std::size_t k = n_peaks;

    LeastSquaresProblem problem;
    problem.n_residuals = m;
    problem.n_params = 3 * k;
    problem.residuals = [energies, targets, m, k](std::span<const double> p,
                                                  std::span<double> r) {
        for (std::size_t i = 0; i < m; ++i) {
            double model = 0.0;
            const double e = (*energies)[i];
            for (std::size_t q = 0; q < k; ++q) {
                const double amp = p[3 * q];
                const double c = p[3 * q + 1];
                const double half = std::abs(p[3 * q + 2]) / 2.0;
                const double d = e - c;
                model += amp * half * half / (d * d + half * half);
            }
            r[i] = model - (*targets)[i];
        }
    };
    problem.jacobian = [energies, m, k](std::span<const double> p, std::span<double> jac) {
        const std::size_t n = 3 * k;
        for (std::size_t i = 0; i < m; ++i) {
            const double e = (*energies)[i];
            for (std::size_t q = 0; q < k; ++q) {
                const double amp = p[3 * q];
                const double w = p[3 * q + 2];
                const double half = std::abs(w) / 2.0;
                const double d = e - p[3 * q + 1];
                const double den = d * d + half * half;
                jac[i * n + 3 * q] = half * half / den;
                jac[i * n + 3 * q + 1] = amp * 2.0 * d * half * half / (den * den);
                // d/dw of (w/2)^2/(d^2+(w/2)^2) = w d^2 / (2 den^2), through |w|
                const double sign = w < 0.0 ? -1.0 : 1.0;
                jac[i * n + 3 * q + 2] = sign * amp * std::abs(w) / 2.0 * d * d / (den * den);
            }
        }
    };
    return problem;
}

PeakSet extract_peaks(const Spectrum& s, int max_peaks, double floor_frac) {
    if (s.energies_ueV.size() != s.intensities.size())
        throw std::invalid_argument("extract_peaks: grid/intensity size mismatch");
    PeakSet out;
    const auto seeds = find_seeds(s, max_peaks, floor_frac);
    if (seeds.empty()) return out;

    const std::size_t k = seeds.size();
    const std::size_t m = s.energies_ueV.size();
    const double grid_step = m > 1 ? s.energies_ueV[1] - s.energies_ueV[0] : 1.0;

    // Joint fit of all peaks: overlapping Lorentzians bias single-peak
    // refinements, a simultaneous fit does not.
    const LeastSquaresProblem problem = multi_lorentzian_problem(s, k);

    std::vector<double> p0;
    p0.reserve(3 * k);
    for (const auto& seed : seeds) {
        p0.push_back(seed.amplitude);
        p0.push_back(seed.center);
        p0.push_back(seed.fwhm);
    }
    const LmResult fit = levenberg_marquardt(problem, p0);

    // Noisy spectra leave the refinement crawling at the noise floor past
    // the iteration cap; the iterate is converged for peak purposes once the
    // recent accepted steps stopped improving the cost materially.
    bool settled = fit.converged;
    const auto& costs = fit.accepted_costs;
    if (!settled && costs.size() > 10) {
        const double tail = costs[costs.size() - 11];
        settled = (tail - costs.back()) < 0.02 * costs.back();
    }

    const double span_lo = s.energies_ueV.front();
    const double span_hi = s.energies_ueV.back();
    for (std::size_t q = 0; q < k; ++q) {
        Peak peak;
        const bool sane = settled && std::abs(fit.params[3 * q + 2]) > 0.0 &&
                          fit.params[3 * q] > 0.0 &&
                          fit.params[3 * q + 1] >= span_lo && fit.params[3 * q + 1] <= span_hi;
        if (sane) {
            peak.amplitude = fit.params[3 * q];
            peak.center_ueV = fit.params[3 * q + 1];
            peak.fwhm_ueV = std::abs(fit.params[3 * q + 2]);
            peak.center_uncertainty_ueV = fit.std_errors[3 * q + 1];
            peak.refined = true;
        } else {
            peak.amplitude = seeds[q].amplitude;
            peak.center_ueV = seeds[q].center;
            peak.fwhm_ueV = seeds[q].fwhm;
            peak.center_uncertainty_ueV = grid_step;
            peak.refined = false;
        }
        out.peaks.push_back(peak);
    }

    // Noise spikes that slipped past the grid floor come out of the joint
    // fit with sub-floor amplitudes or pixel-scale widths; drop them.
    double amp_max = 0.0;
    for (const auto& p : out.peaks) amp_max = std::max(amp_max, p.amplitude);
    std::erase_if(out.peaks, [&](const Peak& p) {
        return p.amplitude < floor_frac * amp_max || p.fwhm_ueV < 1.5 * grid_step;
    });

    std::sort(out.peaks.begin(), out.peaks.end(),
              [](const Peak& a, const Peak& b) { return a.center_ueV < b.center_ueV; });
    return out;
}

std::vector<BranchTrack> track_branches(const std::vector<PeakSet>& frames) {
    struct Live {
        std::size_t track;
        double last_center;
    };
    std::vector<BranchTrack> tracks;

    // Pass 1: unconstrained nearest matching to estimate the inter-frame
    // shift of the fastest-moving branch.  A static branch (the cavity
    // line) contributes near-zero samples that would drag a median to
    // nothing, so the scale is the 90th percentile.
    std::vector<double> shifts;
    for (std::size_t f = 1; f < frames.size(); ++f) {
        for (const auto& peak : frames[f].peaks) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& prev : frames[f - 1].peaks)
                best = std::min(best, std::abs(peak.center_ueV - prev.center_ueV));
            if (std::isfinite(best)) shifts.push_back(best);
        }
    }
    double max_jump = std::numeric_limits<double>::infinity();
    if (!shifts.empty()) {
        const std::size_t q = shifts.size() * 9 / 10;
        std::nth_element(shifts.begin(), shifts.begin() + q, shifts.end());
        const double scale = shifts[q];
        if (scale > 0.0) max_jump = 3.0 * scale;
    }

    // Pass 2: greedy nearest-neighbor continuation under the jump cap.
    // Candidate pairs are taken in ascending distance; among equal distances
    // the ordering of (track, peak) indices preserves branch order.
    std::vector<Live> live;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto& peaks = frames[f].peaks;
        struct Cand {
            double dist;
            std::size_t live_idx;
            std::size_t peak_idx;
        };
        std::vector<Cand> cands;
        for (std::size_t li = 0; li < live.size(); ++li)
            for (std::size_t pi = 0; pi < peaks.size(); ++pi) {
                const double d = std::abs(peaks[pi].center_ueV - live[li].last_center);
                if (d <= max_jump) cands.push_back({d, li, pi});
            }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            if (a.live_idx != b.live_idx) return a.live_idx < b.live_idx;
            return a.peak_idx < b.peak_idx;
        });

        std::vector<bool> live_used(live.size(), false), peak_used(peaks.size(), false);
        for (const auto& c : cands) {
            if (live_used[c.live_idx] || peak_used[c.peak_idx]) continue;
            live_used[c.live_idx] = true;
            peak_used[c.peak_idx] = true;
            auto& track = tracks[live[c.live_idx].track];
            track.frame_index.push_back(f);
            track.peaks.push_back(peaks[c.peak_idx]);
            live[c.live_idx].last_center = peaks[c.peak_idx].center_ueV;
        }
        for (std::size_t pi = 0; pi < peaks.size(); ++pi) {
            if (peak_used[pi]) continue;
            BranchTrack t;
            t.frame_index.push_back(f);
            t.peaks.push_back(peaks[pi]);
            tracks.push_back(std::move(t));
            live.push_back({tracks.size() - 1, peaks[pi].center_ueV});
        }
    }
    return tracks;
}

namespace {

struct GapSeries {
    // gap between a fixed pair of tracks, per frame where both exist
    std::vector<std::size_t> frame;
    std::vector<double> gap;
};

GapSeries pair_gaps(const BranchTrack& a, const BranchTrack& b) {
    GapSeries gs;
    std::size_t i = 0, j = 0;
    while (i < a.frame_index.size() && j < b.frame_index.size()) {
        if (a.frame_index[i] == b.frame_index[j]) {
            gs.frame.push_back(a.frame_index[i]);
            gs.gap.push_back(std::abs(a.peaks[i].center_ueV - b.peaks[j].center_ueV));
            ++i;
            ++j;
        } else if (a.frame_index[i] < b.frame_index[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return gs;
}

struct Minimum {
    double tuning;
    double gap;
};

// Parabolic refinement through three consecutive samples (general spacing).
Minimum refine_minimum(const std::vector<double>& t, const std::vector<double>& y,
                       std::size_t j) {
    if (j == 0 || j + 1 >= y.size()) return {t[j], y[j]};
    const double x1 = t[j - 1], x2 = t[j], x3 = t[j + 1];
    const double y1 = y[j - 1], y2 = y[j], y3 = y[j + 1];
    const double d21 = (y2 - y1) / (x2 - x1);
    const double d32 = (y3 - y2) / (x3 - x2);
    const double curv = (d32 - d21) / (x3 - x1);
    if (!(curv > 0.0)) return {x2, y2};
    const double xv = (x1 + x2) / 2.0 - d21 / (2.0 * curv);
    const double x_star = std::clamp(xv, x1, x3);
    // Evaluate the parabola (Newton form) at the vertex.
    const double y_star = y1 + d21 * (x_star - x1) + curv * (x_star - x1) * (x_star - x2);
    return {x_star, std::max(y_star, 0.0)};
}

std::vector<AntiCrossing> detect_impl(const SweepMap& map, const DetectOptions& opt,
                                      bool all_minima) {
    if (map.tuning.size() < 3)
        throw std::runtime_error("no anti-crossing found: sweep has fewer than 3 frames");

    std::vector<PeakSet> frames;
    frames.reserve(map.tuning.size());
    for (std::size_t f = 0; f < map.tuning.size(); ++f)
        frames.push_back(extract_peaks(map.frame(f), opt.max_peaks, opt.floor_frac));

    const auto tracks = track_branches(frames);

    // A third branch between the pair at the minimum frame marks the pair as
    // non-adjacent; such minima are artifacts of polariton bending seen from
    // a distant line, not anti-crossings.
    auto pair_is_adjacent = [&](std::size_t a, std::size_t b, std::size_t frame_idx,
                                double lo, double hi) {
        for (std::size_t t = 0; t < tracks.size(); ++t) {
            if (t == a || t == b) continue;
            const auto& fi = tracks[t].frame_index;
            const auto it = std::lower_bound(fi.begin(), fi.end(), frame_idx);
            if (it == fi.end() || *it != frame_idx) continue;
            const double c = tracks[t].peaks[it - fi.begin()].center_ueV;
            if (c > lo && c < hi) return false;
        }
        return true;
    };

    // Interior minima of every overlapping adjacent track pair.
    std::vector<AntiCrossing> found;
    for (std::size_t a = 0; a < tracks.size(); ++a)
        for (std::size_t b = a + 1; b < tracks.size(); ++b) {
            const GapSeries gs = pair_gaps(tracks[a], tracks[b]);
            if (gs.gap.size() < 3) continue;
            std::vector<double> tun(gs.gap.size());
            for (std::size_t i = 0; i < gs.gap.size(); ++i) tun[i] = map.tuning[gs.frame[i]];
            for (std::size_t i = 1; i + 1 < gs.gap.size(); ++i) {
                if (!(gs.gap[i] <= gs.gap[i - 1] && gs.gap[i] < gs.gap[i + 1])) continue;
                // Prominence: a real anti-crossing dips well below the gaps
                // on both sides; micro-dips from extraction noise on slowly
                // varying pairs do not.
                double left_max = 0.0, right_max = 0.0;
                for (std::size_t l = 0; l < i; ++l) left_max = std::max(left_max, gs.gap[l]);
                for (std::size_t r = i + 1; r < gs.gap.size(); ++r)
                    right_max = std::max(right_max, gs.gap[r]);
                const double prominence = std::min(left_max, right_max) - gs.gap[i];
                if (prominence <
                    std::max(0.5 * opt.resolution_floor_ueV, 0.15 * gs.gap[i]))
                    continue;
                const auto& ta = tracks[a];
                const auto& tb = tracks[b];
                const double ca =
                    ta.peaks[std::lower_bound(ta.frame_index.begin(), ta.frame_index.end(),
                                              gs.frame[i]) -
                             ta.frame_index.begin()]
                        .center_ueV;
                const double cb =
                    tb.peaks[std::lower_bound(tb.frame_index.begin(), tb.frame_index.end(),
                                              gs.frame[i]) -
                             tb.frame_index.begin()]
                        .center_ueV;
                if (!pair_is_adjacent(a, b, gs.frame[i], std::min(ca, cb), std::max(ca, cb)))
                    continue;
                const Minimum mn = refine_minimum(tun, gs.gap, i);
                AntiCrossing ac;
                ac.tuning_at_min = mn.tuning;
                ac.min_gap_ueV = mn.gap;
                // A frame hole at the minimum means the pair blended into a
                // single peak there: the lines cross within resolution.
                const bool hole_at_min = gs.frame[i] - gs.frame[i - 1] > 1 ||
                                         gs.frame[i + 1] - gs.frame[i] > 1;
                ac.crossing_only = mn.gap < opt.resolution_floor_ueV || hole_at_min;
                found.push_back(ac);
            }
        }
    if (found.empty())
        throw std::runtime_error("no anti-crossing found: branch gap has no interior minimum");

    std::vector<AntiCrossing> out;
    if (all_minima) {
        std::sort(found.begin(), found.end(), [](const AntiCrossing& x, const AntiCrossing& y) {
            return x.tuning_at_min < y.tuning_at_min;
        });
        // Collapse near-duplicates from different track pairings at the same
        // tuning point, keeping the smallest gap.
        for (const auto& ac : found) {
            if (!out.empty() && std::abs(out.back().tuning_at_min - ac.tuning_at_min) <
                                    1e-9 * std::max(1.0, std::abs(ac.tuning_at_min))) {
                if (ac.min_gap_ueV < out.back().min_gap_ueV) out.back() = ac;
            } else {
                out.push_back(ac);
            }
        }
        const bool split_branches = map.fixed_field_T.has_value() && *map.fixed_field_T > 0.0;
        if (split_branches && out.size() >= 2) {
            out.front().branch = BranchId::plus_one;
            out.back().branch = BranchId::minus_one;
        }
    } else {
        out.push_back(*std::min_element(
            found.begin(), found.end(), [](const AntiCrossing& x, const AntiCrossing& y) {
                return x.min_gap_ueV < y.min_gap_ueV;
            }));
    }
    return out;
}

} // namespace

AntiCrossing detect_anticrossing(const SweepMap& map, const DetectOptions& opt) {
    return detect_impl(map, opt, false).front();
}

std::vector<AntiCrossing> detect_anticrossings(const SweepMap& map, const DetectOptions& opt) {
    return detect_impl(map, opt, true);
}

SweepMap window_map(const SweepMap& map, double t_lo, double t_hi) {
    SweepMap out;
    out.axis_kind = map.axis_kind;
    out.energies_ueV = map.energies_ueV;
    out.fixed_field_T = map.fixed_field_T;
    for (std::size_t i = 0; i < map.tuning.size(); ++i) {
        if (map.tuning[i] < t_lo || map.tuning[i] > t_hi) continue;
        out.tuning.push_back(map.tuning[i]);
        out.intensities.push_back(map.intensities[i]);
    }
    return out;
}

} // namespace qdcav
