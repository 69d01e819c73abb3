#ifndef PATCHLINK_HARNESS_HPP
#define PATCHLINK_HARNESS_HPP

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "patchlink/detection.hpp"
#include "patchlink/importance.hpp"

namespace patchlink {

// Evaluated pipeline variants: mask policy x interpolation on/off.
enum class Method { random, random_interp, dqn, dqn_interp };

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);
bool method_uses_dqn(Method m);
bool method_uses_interp(Method m);

struct ExperimentConfig {
    SceneConfig scene;
    std::string dataset_dir; // when set, frames/annotations are loaded instead
    int k = 8;
    std::vector<double> rates = {0.05, 0.10, 0.25, 0.50, 0.75, 0.85, 1.0};
    std::vector<Method> methods = {Method::random, Method::random_interp, Method::dqn,
                                   Method::dqn_interp};
    double loss_probability = 0.0;
    bool reorder = false;
    QConfig q;
    double theta = 0.8;
    int bootstrap_frames = 4;
    int feedback_period = 1;
    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string output_dir = "out";
};

// One (method, rate, seed) evaluation, aggregated over post-bootstrap frames.
struct MetricsRecord {
    Method method = Method::random;
    double rate = 1.0;
    uint64_t seed = 0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    int64_t bits_total = 0;
    int frames = 0;
    double mean_reconstruction_error = 0.0;
    double wall_time_s = 0.0;
};

// Optional per-episode instrumentation for tests and diagnostics.
struct EpisodeTrace {
    // per evaluated frame: whole-frame error of the raw (filler) assembly and
    // of the final reconstruction handed to the detector
    std::vector<double> filler_error;
    std::vector<double> final_error;
    // mean L2 distance between consecutive published probability maps (dqn)
    double mean_map_change = 0.0;
    // last published probability map (dqn), k*k row-major
    std::vector<double> final_map;
    // cells overlapped by the ground-truth box at any frame
    std::vector<uint8_t> path_cells;
    // trained importance model (dqn), for checkpointing
    std::shared_ptr<const ImportanceModel> final_model;
};

// Runs the closed loop for one (method, rate, seed) cell:
// schedule -> tile -> encode -> lossy channel -> decode -> assemble ->
// interpolate -> detect -> reward/train -> probability map -> feedback.
MetricsRecord run_episode(const ExperimentConfig& cfg, Method method, double rate, uint64_t seed,
                          EpisodeTrace* trace = nullptr);

// Full methods x rates x seeds sweep. Writes results.csv, summary.txt,
// bits_vs_rate.csv, per-run heatmaps for dqn methods, and a config snapshot
// into cfg.output_dir.
std::vector<MetricsRecord> run_matrix(const ExperimentConfig& cfg);

// Seed-averaged F1/precision summary, one row block per rate.
std::string summary_table(const ExperimentConfig& cfg, const std::vector<MetricsRecord>& records);

void write_records_csv(const std::vector<MetricsRecord>& records, const std::string& path);

// Flat key = value config file; '#' starts a comment. Unknown keys are errors.
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, std::ostream& out);

} // namespace patchlink

#endif // PATCHLINK_HARNESS_HPP
