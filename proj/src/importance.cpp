#include "patchlink/importance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "patchlink/pgm_io.hpp"

namespace patchlink {

double reward(CellId cell, const RewardInput& input, const GridSpec& grid, const QConfig& cfg) {
    const int linear = grid.linear(cell);
    double m = 0.0;
    if (!input.motion.empty()) {
        m = input.motion[static_cast<size_t>(linear)];
        if (m < 0.0 || m > 1.0) throw std::invalid_argument("motion entries must be in [0,1]");
    }
    double o = 0.0;
    if (input.target_box) o = cell_overlap(cell, grid, *input.target_box);
    return cfg.reward_overlap * o + cfg.reward_motion * m;
}

double bellman_target(double r, double gamma, double q_next) {
    return r + gamma * q_next;
}

double q_update(QTable& table, std::span<const Transition> batch, double gamma, double alpha) {
    if (batch.empty()) throw std::invalid_argument("empty transition batch");
    double sq_sum = 0.0;
    for (const Transition& t : batch) {
        const double target = bellman_target(t.reward, gamma, table.best_value(t.next_state));
        const double residual = table.get(t.state, t.action) - target;
        sq_sum += residual * residual;
    }
    for (const Transition& t : batch) {
        const double target = bellman_target(t.reward, gamma, table.best_value(t.next_state));
        table.add(t.state, t.action, alpha * (target - table.get(t.state, t.action)));
    }
    return sq_sum / static_cast<double>(batch.size());
}

std::vector<double> probability_map(std::span<const double> weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("weights must be >= 0");
        sum += w;
    }
    std::vector<double> probs(weights.size());
    if (sum <= 0.0) {
        std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(weights.size()));
        return probs;
    }
    for (size_t i = 0; i < weights.size(); ++i) probs[i] = weights[i] / sum;
    return probs;
}

void export_heatmap(std::span<const double> probs, int k, const std::string& path) {
    if (static_cast<int>(probs.size()) != k * k) {
        throw std::invalid_argument("probability map size does not match grid");
    }
    const double max = *std::max_element(probs.begin(), probs.end());
    Frame img(0, k, k);
    for (int i = 0; i < k * k; ++i) {
        const double v = max > 0.0 ? probs[static_cast<size_t>(i)] / max : 0.0;
        img.pixels[static_cast<size_t>(i)] = static_cast<uint8_t>(std::lround(255.0 * v));
    }
    save_pgm(img, path);
}

ImportanceModel::ImportanceModel(int k, QConfig cfg)
    : k_(k), cfg_(cfg), q_(k * k * cfg.bins * cfg.bins) {
    if (k < 1) throw std::invalid_argument("grid size k must be >= 1");
    if (cfg.bins < 1) throw std::invalid_argument("bins must be >= 1");
    if (cfg.gamma < 0.0 || cfg.gamma >= 1.0) throw std::invalid_argument("gamma must be in [0,1)");
    if (cfg.alpha <= 0.0) throw std::invalid_argument("alpha must be > 0");
    if (cfg.lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
}

int ImportanceModel::bin_of(double value) const {
    const int b = static_cast<int>(value * cfg_.bins);
    return std::clamp(b, 0, cfg_.bins - 1);
}

CellState ImportanceModel::make_state(CellId cell, double overlap, double motion) const {
    return CellState{cell, bin_of(overlap), bin_of(motion)};
}

int ImportanceModel::state_index(const CellState& s) const {
    const int linear = s.cell.row * k_ + s.cell.col;
    return (linear * cfg_.bins + s.overlap_bin) * cfg_.bins + s.motion_bin;
}

double ImportanceModel::train_step(std::span<const Transition> batch,
                                   const std::vector<double>* prev_probs) {
    if (batch.empty()) throw std::invalid_argument("empty transition batch");
    const int cells = k_ * k_;
    if (prev_probs &&
        (static_cast<int>(batch.size()) != cells || static_cast<int>(prev_probs->size()) != cells)) {
        throw std::invalid_argument("smoothness penalty needs one transition per cell");
    }

    // Pre-update snapshot of the published map, for both the reported loss
    // and the penalty gradient.
    double penalty = 0.0;
    std::vector<double> qt, probs, diff;
    std::vector<Action> best;
    double qt_sum = 0.0;
    if (prev_probs) {
        qt.resize(static_cast<size_t>(cells));
        best.resize(static_cast<size_t>(cells));
        for (int i = 0; i < cells; ++i) {
            qt[static_cast<size_t>(i)] = std::max(0.0, q_.best_value(batch[i].next_state));
            best[static_cast<size_t>(i)] = q_.best_action(batch[i].next_state);
            qt_sum += qt[static_cast<size_t>(i)];
        }
        probs = probability_map(qt);
        diff.resize(static_cast<size_t>(cells));
        for (int i = 0; i < cells; ++i) {
            diff[static_cast<size_t>(i)] = probs[static_cast<size_t>(i)] -
                                           (*prev_probs)[static_cast<size_t>(i)];
            penalty += diff[static_cast<size_t>(i)] * diff[static_cast<size_t>(i)];
        }
        penalty *= cfg_.lambda;
    }

    const double bellman_loss = q_update(q_, batch, cfg_.gamma, cfg_.alpha);

    // Gradient of the penalty through w_i = Q^t_i / sum_j Q^t_j:
    //   d/dQ^t_i = (2*lambda/sum) * (diff_i - sum_j diff_j * P_j),
    // applied to the argmax action of each current state. Zero-clamped states
    // (Q^t = 0) and the uniform fallback contribute no gradient.
    if (prev_probs && cfg_.lambda > 0.0 && qt_sum > 0.0) {
        double dot = 0.0;
        for (int i = 0; i < cells; ++i) {
            dot += diff[static_cast<size_t>(i)] * probs[static_cast<size_t>(i)];
        }
        const double scale = 2.0 * cfg_.lambda / qt_sum;
        for (int i = 0; i < cells; ++i) {
            if (qt[static_cast<size_t>(i)] <= 0.0) continue;
            const double grad = scale * (diff[static_cast<size_t>(i)] - dot);
            q_.add(batch[i].next_state, best[static_cast<size_t>(i)], -cfg_.alpha * grad);
        }
    }

    return bellman_loss + penalty;
}

std::vector<double> ImportanceModel::weight_map(std::span<const CellState> states) const {
    if (static_cast<int>(states.size()) != k_ * k_) {
        throw std::invalid_argument("need one state per cell");
    }
    std::vector<double> qt(states.size());
    double sum = 0.0;
    for (size_t i = 0; i < states.size(); ++i) {
        qt[i] = std::max(0.0, q_.best_value(state_index(states[i])));
        sum += qt[i];
    }
    if (sum <= 0.0) {
        ++uniform_fallbacks_;
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true)) {
            std::fprintf(stderr,
                         "patchlink: all-zero importance weights, publishing uniform map\n");
        }
        return std::vector<double>(states.size(), 1.0 / static_cast<double>(states.size()));
    }
    for (double& w : qt) w /= sum;
    return qt;
}

void ImportanceModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "patchlink-qmodel v1\n";
    out << "k " << k_ << "\n";
    out << "bins " << cfg_.bins << "\n";
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "gamma %.17g\nlambda %.17g\nalpha %.17g\n"
                  "reward_overlap %.17g\nreward_motion %.17g\n",
                  cfg_.gamma, cfg_.lambda, cfg_.alpha, cfg_.reward_overlap, cfg_.reward_motion);
    out << buf;
    for (int s = 0; s < q_.state_count(); ++s) {
        for (int a = 0; a < kActionCount; ++a) {
            const double v = q_.get(s, static_cast<Action>(a));
            if (v == 0.0) continue;
            std::snprintf(buf, sizeof buf, "q %d %d %.17g\n", s, a, v);
            out << buf;
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

ImportanceModel ImportanceModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string header;
    std::getline(in, header);
    if (header != "patchlink-qmodel v1") {
        throw std::runtime_error("unsupported model checkpoint: " + path);
    }
    int k = 0;
    QConfig cfg;
    std::vector<std::tuple<int, int, double>> entries;
    std::string key;
    while (in >> key) {
        if (key == "k") in >> k;
        else if (key == "bins") in >> cfg.bins;
        else if (key == "gamma") in >> cfg.gamma;
        else if (key == "lambda") in >> cfg.lambda;
        else if (key == "alpha") in >> cfg.alpha;
        else if (key == "reward_overlap") in >> cfg.reward_overlap;
        else if (key == "reward_motion") in >> cfg.reward_motion;
        else if (key == "q") {
            int s, a;
            double v;
            in >> s >> a >> v;
            entries.emplace_back(s, a, v);
        } else {
            throw std::runtime_error("unknown checkpoint key '" + key + "' in " + path);
        }
    }
    ImportanceModel model(k, cfg);
    for (const auto& [s, a, v] : entries) {
        if (s < 0 || s >= model.q_.state_count() || a < 0 || a >= kActionCount) {
            throw std::runtime_error("checkpoint entry out of range in " + path);
        }
        model.q_.set(s, static_cast<Action>(a), v);
    }
    return model;
}

} // namespace patchlink
