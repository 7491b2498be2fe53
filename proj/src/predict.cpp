#include "reaper/predict.hpp"

#include <algorithm>
#include <cmath>

namespace reaper::predict {

namespace {
// Rates are means of at most a few dozen bits; this absorbs summation error.
constexpr double kRateEps = 1e-9;

double frame_mod(double x, double period) {
    double m = std::fmod(x, period);
    if (m < 0) m += period;
    return m;
}
}  // namespace

bool BetaFrame::contains(int slot) const {
    return std::binary_search(betas.begin(), betas.end(), slot);
}

void BetaFrame::validate() const {
    if (frame_len < 1) throw Error("beta frame: frame length must be >= 1");
    if (betas.empty()) throw Error("beta frame: at least one meeting slot required");
    int prev = 0;
    for (int b : betas) {
        if (b <= prev || b > frame_len)
            throw Error("beta frame: slots must be strictly increasing within [1, f]");
        prev = b;
    }
}

BetaFrame build_beta_frame(const std::vector<double>& rates, const trace::SlotGrid& grid,
                           NodePair pair, const BetaOptions& options) {
    grid.validate();
    if (static_cast<int>(rates.size()) != grid.frame_len)
        throw Error("build_beta_frame: rate vector length must equal frame length");

    auto rate_at = [&](int slot) {
        double r = rates[static_cast<std::size_t>(slot - 1)];
        return r < options.p_thresh ? 0.0 : r;
    };

    BetaFrame beta;
    beta.pair = pair;
    beta.frame_len = grid.frame_len;
    beta.slot_len = grid.slot_len;

    // First pass. Carrying (sum - 1) into the next accumulation is the same
    // as asking for the first slot where the running total reaches l.
    double total = 0.0;
    int last_nonzero = 0;
    for (int r = 1; r <= grid.frame_len; ++r) {
        double c = rate_at(r);
        if (c <= 0.0) continue;
        last_nonzero = r;
        total += c;
        if (total + kRateEps >= static_cast<double>(beta.betas.size() + 1))
            beta.betas.push_back(r);
    }
    if (last_nonzero == 0) throw NoContactError("pair never met: no slot with a non-zero rate");

    // Second pass: the final meeting sits at the last non-zero slot.
    while (!beta.betas.empty() && beta.betas.back() > last_nonzero) beta.betas.pop_back();
    if (beta.betas.empty() || beta.betas.back() != last_nonzero) beta.betas.push_back(last_nonzero);
    return beta;
}

std::optional<BetaFrame> beta_frame_for_pair(const trace::ContactTrace& trace,
                                             const trace::SlotGrid& grid, NodePair pair,
                                             const BetaOptions& options) {
    auto rates = trace::slot_contact_rate(trace::slot_history(trace, grid, pair));
    try {
        return build_beta_frame(rates, grid, pair, options);
    } catch (const NoContactError&) {
        return std::nullopt;
    }
}

int normalize_instant(double x, const trace::SlotGrid& grid) {
    double rel = frame_mod(x - grid.epoch, grid.frame_seconds());
    int slot = static_cast<int>(std::ceil(rel / grid.slot_len));
    if (slot <= 0) slot = grid.frame_len;
    return std::min(slot, grid.frame_len);
}

double max_delay_to_next_contact(const BetaFrame& beta, double x) {
    beta.validate();
    trace::SlotGrid grid;
    grid.slot_len = beta.slot_len;
    grid.frame_len = beta.frame_len;
    const int xs = normalize_instant(x, grid);
    const double s = beta.slot_len;
    const double tail = s - frame_mod(x, s);

    int prev = 0;
    for (int b : beta.betas) {
        if (prev <= xs && xs < b) return (b - xs) * s + tail;
        prev = b;
    }
    return ((beta.frame_len - xs) + beta.betas.front()) * s + tail;
}

}  // namespace reaper::predict
