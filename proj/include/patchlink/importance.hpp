#ifndef PATCHLINK_IMPORTANCE_HPP
#define PATCHLINK_IMPORTANCE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patchlink/frame.hpp"

namespace patchlink {

// Per-cell decision: send the patch or keep it back.
enum class Action : int { transmit = 0, skip = 1 };
inline constexpr int kActionCount = 2;

struct QConfig {
    double gamma = 0.9;  // discount factor, in [0,1)
    double lambda = 1.0; // smoothness penalty strength, >= 0
    double alpha = 0.1;  // learning rate, in (0,1]
    double reward_overlap = 1.0;
    double reward_motion = 0.5;
    int bins = 4; // discretization bins for the overlap/motion features
};

// One observed step of the per-cell decision process. States are dense
// indices into a QTable.
struct Transition {
    int state = 0;
    Action action = Action::transmit;
    double reward = 0.0;
    int next_state = 0;
};

// Dense tabular action-value function over [0, state_count) x {transmit, skip}.
class QTable {
public:
    explicit QTable(int state_count)
        : q_(static_cast<size_t>(state_count) * kActionCount, 0.0) {}

    int state_count() const { return static_cast<int>(q_.size()) / kActionCount; }

    double get(int state, Action a) const { return q_[slot(state, a)]; }
    void set(int state, Action a, double v) { q_[slot(state, a)] = v; }
    void add(int state, Action a, double dv) { q_[slot(state, a)] += dv; }

    double best_value(int state) const {
        return std::max(get(state, Action::transmit), get(state, Action::skip));
    }
    Action best_action(int state) const {
        // ties resolve to transmit
        return get(state, Action::skip) > get(state, Action::transmit) ? Action::skip
                                                                       : Action::transmit;
    }

private:
    size_t slot(int state, Action a) const {
        return static_cast<size_t>(state) * kActionCount + static_cast<int>(a);
    }
    std::vector<double> q_;
};

// Reward features for one frame: overlap with the target box (detector output
// or ground truth) and per-cell motion, both in [0,1].
struct RewardInput {
    std::optional<BoundingBox> target_box;
    std::vector<double> motion; // k*k entries, row-major; mean |diff| vs previous frame / 255
};

// r = reward_overlap * cell_overlap + reward_motion * motion[cell].
double reward(CellId cell, const RewardInput& input, const GridSpec& grid,
              const QConfig& cfg = QConfig{});

// r + gamma * q_next, with q_next the best next-state action value.
double bellman_target(double r, double gamma, double q_next);

// One pass of tabular Q-learning over a batch: for each transition, in order,
// Q(s,a) += alpha * (target - Q(s,a)) with target = r + gamma * max_a' Q(s',a').
// Returns the mean squared Bellman residual before any update.
double q_update(QTable& table, std::span<const Transition> batch, double gamma, double alpha);

// Discretized per-cell state: which cell, plus binned recent overlap/motion.
struct CellState {
    CellId cell;
    int overlap_bin = 0;
    int motion_bin = 0;
};

// Normalizes weights into transmission probabilities. Weights must be
// non-negative; an all-zero input falls back to a uniform map.
std::vector<double> probability_map(std::span<const double> weights);

// k x k PGM, pixel = round(255 * P_i / max P). Lighter = more important.
void export_heatmap(std::span<const double> probs, int k, const std::string& path);

// Receiver-side importance model: a tabular Q function over
// (cell, overlap_bin, motion_bin) states, trained per frame, publishing a
// normalized per-cell transmission-probability map.
class ImportanceModel {
public:
    explicit ImportanceModel(int k, QConfig cfg = QConfig{});

    int k() const { return k_; }
    const QConfig& config() const { return cfg_; }
    QTable& table() { return q_; }
    const QTable& table() const { return q_; }

    // Feature binning: bins of equal width over [0,1], top bin closed.
    int bin_of(double value) const;
    CellState make_state(CellId cell, double overlap, double motion) const;
    int state_index(const CellState& s) const;

    // One training step on a frame's transitions. When prev_probs is given the
    // batch must hold exactly k*k transitions in row-major cell order with
    // next_state = the cell's current state; the smoothness penalty
    // lambda * sum_i (P_i - prev_P_i)^2 is then added to the returned loss and
    // its gradient (through the weight normalization) is applied to the Q
    // entries of the current states. Returns the pre-update total loss.
    double train_step(std::span<const Transition> batch, const std::vector<double>* prev_probs);

    // w_i = Q^t(s_i) / sum_j Q^t(s_j), with Q^t(s) = max(0, max_a Q(s,a)).
    // All-zero numerators fall back to a uniform map (counted, logged once).
    std::vector<double> weight_map(std::span<const CellState> states) const;

    int64_t uniform_fallbacks() const { return uniform_fallbacks_; }

    // Versioned textual checkpoint of hyperparameters plus non-zero Q entries.
    void save(const std::string& path) const;
    static ImportanceModel load(const std::string& path);

private:
    int k_;
    QConfig cfg_;
    QTable q_;
    mutable int64_t uniform_fallbacks_ = 0;
};

} // namespace patchlink

#endif // PATCHLINK_IMPORTANCE_HPP
