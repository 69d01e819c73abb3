#include "patchlink/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "patchlink/channel.hpp"
#include "patchlink/pgm_io.hpp"
#include "patchlink/reconstruct.hpp"
#include "patchlink/rng.hpp"
#include "patchlink/scheduler.hpp"
#include "patchlink/wire.hpp"

namespace patchlink {

namespace {

namespace fs = std::filesystem;

// sub-seed stream tags, one per independent randomness consumer
enum : uint64_t {
    kStreamScheduler = 1,
    kStreamChannel = 2,
    kStreamFeedbackChannel = 3,
    kStreamBackground = 4,
    kStreamObject = 5,
    kStreamJitter = 6,
};

struct EpisodeInput {
    std::vector<Frame> frames;            // original (unpadded) frames
    std::vector<std::optional<BoundingBox>> boxes; // ground truth per frame
};

EpisodeInput load_dataset(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    if (files.empty()) throw std::runtime_error("no .pgm frames in " + dir);
    std::sort(files.begin(), files.end());

    EpisodeInput input;
    std::map<uint32_t, BoundingBox> annotations;
    const fs::path ann = fs::path(dir) / "annotations.csv";
    if (fs::exists(ann)) annotations = load_annotations(ann.string());

    for (size_t i = 0; i < files.size(); ++i) {
        Frame f = load_pgm(files[i].string());
        f.index = static_cast<uint32_t>(i);
        std::optional<BoundingBox> box;
        if (auto it = annotations.find(f.index); it != annotations.end()) {
            box = clip_box(it->second, f.width, f.height);
        }
        input.frames.push_back(std::move(f));
        input.boxes.push_back(box);
    }
    return input;
}

EpisodeInput build_input(const ExperimentConfig& cfg, uint64_t seed) {
    if (!cfg.dataset_dir.empty()) return load_dataset(cfg.dataset_dir);
    SceneConfig sc = cfg.scene;
    // each seed gets its own textures and jitter stream
    sc.background_seed = mix_seed(seed, kStreamBackground ^ cfg.scene.background_seed);
    sc.object_seed = mix_seed(seed, kStreamObject ^ cfg.scene.object_seed);
    sc.jitter_seed = mix_seed(seed, kStreamJitter ^ cfg.scene.jitter_seed);
    Scene scene = scene_generate(sc);
    EpisodeInput input;
    input.frames = std::move(scene.frames);
    input.boxes.assign(scene.boxes.begin(), scene.boxes.end());
    return input;
}

std::vector<double> cell_motion(const Frame& current, const Frame& previous,
                                const GridSpec& grid) {
    std::vector<double> motion(static_cast<size_t>(grid.cell_count()), 0.0);
    for (int row = 0; row < grid.k; ++row) {
        for (int col = 0; col < grid.k; ++col) {
            long long sum = 0;
            const int x0 = col * grid.patch_w;
            const int y0 = row * grid.patch_h;
            for (int y = y0; y < y0 + grid.patch_h; ++y) {
                for (int x = x0; x < x0 + grid.patch_w; ++x) {
                    sum += std::abs(static_cast<int>(current.at(x, y)) -
                                    static_cast<int>(previous.at(x, y)));
                }
            }
            motion[static_cast<size_t>(row * grid.k + col)] =
                static_cast<double>(sum) / (255.0 * grid.patch_pixels());
        }
    }
    return motion;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

const char* method_name(Method m) {
    switch (m) {
    case Method::random: return "random";
    case Method::random_interp: return "random+interp";
    case Method::dqn: return "dqn";
    case Method::dqn_interp: return "dqn+interp";
    }
    return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
    if (name == "random") return Method::random;
    if (name == "random+interp") return Method::random_interp;
    if (name == "dqn") return Method::dqn;
    if (name == "dqn+interp") return Method::dqn_interp;
    return std::nullopt;
}

bool method_uses_dqn(Method m) { return m == Method::dqn || m == Method::dqn_interp; }
bool method_uses_interp(Method m) {
    return m == Method::random_interp || m == Method::dqn_interp;
}

MetricsRecord run_episode(const ExperimentConfig& cfg, Method method, double rate, uint64_t seed,
                          EpisodeTrace* trace) {
    if (cfg.bootstrap_frames < 1) throw std::invalid_argument("bootstrap_frames must be >= 1");
    if (cfg.feedback_period < 1) throw std::invalid_argument("feedback_period must be >= 1");
    EpisodeInput input = build_input(cfg, seed);
    if (static_cast<int>(input.frames.size()) <= cfg.bootstrap_frames) {
        throw std::invalid_argument("need more frames than bootstrap_frames");
    }
    const int orig_w = input.frames[0].width;
    const int orig_h = input.frames[0].height;
    const Frame probe = pad_to_grid(input.frames[0], cfg.k);
    const GridSpec grid = GridSpec::for_frame(probe.width, probe.height, cfg.k);
    const BoundingBox original_region{0, 0, orig_w, orig_h};
    const int cells = grid.cell_count();

    const bool uses_dqn = method_uses_dqn(method);
    const bool uses_interp = method_uses_interp(method);

    ImportanceModel model(cfg.k, cfg.q);
    ScheduleConfig sched;
    sched.rate = rate;
    sched.bootstrap_frames = cfg.bootstrap_frames;
    sched.policy = uses_dqn ? Policy::dqn : Policy::random;
    sched.seed = mix_seed(seed, kStreamScheduler);
    sched.k = cfg.k;
    const uint64_t channel_seed = mix_seed(seed, kStreamChannel);
    const uint64_t feedback_seed = mix_seed(seed, kStreamFeedbackChannel);

    std::optional<Mask> latest_feedback; // sender side
    Frame prev_recon;
    bool have_recon = false;
    std::vector<CellState> prev_states;
    std::optional<std::vector<double>> prev_probs;
    Mask prev_mask;

    std::vector<DetectionOutcome> outcomes;
    std::vector<Mask> sent_masks;
    double err_sum = 0.0;
    double map_change_sum = 0.0;
    int map_change_count = 0;
    if (trace) trace->path_cells.assign(static_cast<size_t>(cells), 0);

    const auto t0 = std::chrono::steady_clock::now();
    for (uint32_t n = 0; n < input.frames.size(); ++n) {
        const Frame padded = pad_to_grid(input.frames[n], cfg.k);
        const std::optional<BoundingBox>& gt = input.boxes[n];

        // sender: pick cells, packetize
        const Mask mask = schedule(n, sched, latest_feedback);
        const std::vector<Patch> patches = tile(padded, grid);
        std::vector<std::vector<uint8_t>> datagrams;
        datagrams.reserve(static_cast<size_t>(mask.popcount()));
        for (int i = 0; i < cells; ++i) {
            if (mask.test(i)) datagrams.push_back(encode_packet(patches[static_cast<size_t>(i)], grid));
        }

        // lossy downlink
        const auto delivered = channel_transmit(
            datagrams, ChannelConfig{cfg.loss_probability, mix_seed(channel_seed, n), cfg.reorder});

        // receiver: decode, reassemble, fill
        std::vector<Patch> received;
        received.reserve(delivered.size());
        Mask rx_mask(cfg.k, n);
        for (const auto& d : delivered) {
            auto p = decode_packet(d);
            if (!p) continue; // corrupt datagrams count as lost
            const int linear = grid.linear(p->cell);
            if (rx_mask.test(linear)) continue;
            rx_mask.set(linear, true);
            received.push_back(std::move(*p));
        }
        const Frame assembled = assemble(received, grid, rx_mask, 0);
        const Frame recon =
            uses_interp ? interpolate(assembled, rx_mask, have_recon ? &prev_recon : nullptr)
                        : assembled;

        // detection proxy and metrics over post-bootstrap frames
        if (n >= static_cast<uint32_t>(cfg.bootstrap_frames)) {
            DetectionOutcome outcome{n, false, gt.has_value()};
            if (gt) outcome.detected = detect(recon, padded, *gt, cfg.theta);
            outcomes.push_back(outcome);
            const double final_err = reconstruction_error(recon, padded, original_region);
            err_sum += final_err;
            if (trace) {
                trace->filler_error.push_back(
                    reconstruction_error(assembled, padded, original_region));
                trace->final_error.push_back(final_err);
            }
            sent_masks.push_back(mask);
        }

        // receiver-side importance model and feedback
        if (uses_dqn) {
            const std::vector<double> motion =
                have_recon ? cell_motion(recon, prev_recon, grid)
                           : std::vector<double>(static_cast<size_t>(cells), 0.0);
            RewardInput reward_input{gt, motion};
            std::vector<CellState> states;
            states.reserve(static_cast<size_t>(cells));
            for (int i = 0; i < cells; ++i) {
                const CellId cell = grid.cell_at(i);
                const double o = gt ? cell_overlap(cell, grid, *gt) : 0.0;
                states.push_back(model.make_state(cell, o, motion[static_cast<size_t>(i)]));
            }
            if (!prev_states.empty()) {
                std::vector<Transition> batch(static_cast<size_t>(cells));
                for (int i = 0; i < cells; ++i) {
                    batch[static_cast<size_t>(i)] = Transition{
                        model.state_index(prev_states[static_cast<size_t>(i)]),
                        prev_mask.test(i) ? Action::transmit : Action::skip,
                        reward(grid.cell_at(i), reward_input, grid, cfg.q),
                        model.state_index(states[static_cast<size_t>(i)])};
                }
                model.train_step(batch, prev_probs ? &*prev_probs : nullptr);
            }
            const std::vector<double> probs = probability_map(model.weight_map(states));
            if (prev_probs) {
                double sq = 0.0;
                for (int i = 0; i < cells; ++i) {
                    const double d = probs[static_cast<size_t>(i)] -
                                     (*prev_probs)[static_cast<size_t>(i)];
                    sq += d * d;
                }
                map_change_sum += std::sqrt(sq);
                ++map_change_count;
            }

            if (n % static_cast<uint32_t>(cfg.feedback_period) == 0) {
                const Mask fb = select_top(probs, rate, cfg.k, n);
                const std::vector<std::vector<uint8_t>> fb_datagrams{encode_feedback(fb)};
                const auto fb_delivered = channel_transmit(
                    fb_datagrams,
                    ChannelConfig{cfg.loss_probability, mix_seed(feedback_seed, n), false});
                if (!fb_delivered.empty()) {
                    if (auto m = decode_feedback(fb_delivered[0])) latest_feedback = *m;
                }
            }
            prev_probs = probs;
            prev_states = std::move(states);
            if (trace) trace->final_map = probs;
        }

        if (trace && gt) {
            for (int i = 0; i < cells; ++i) {
                if (cell_overlap(grid.cell_at(i), grid, *gt) > 0.0) {
                    trace->path_cells[static_cast<size_t>(i)] = 1;
                }
            }
        }

        prev_mask = mask;
        prev_recon = recon;
        have_recon = true;
    }
    const auto t1 = std::chrono::steady_clock::now();

    MetricsRecord rec;
    rec.method = method;
    rec.rate = rate;
    rec.seed = seed;
    const Scores scores = evaluate(outcomes);
    rec.f1 = scores.f1;
    rec.precision = scores.precision;
    rec.recall = scores.recall;
    rec.frames = static_cast<int>(outcomes.size());
    rec.bits_total = bits_transmitted(sent_masks, grid, kPacketOverheadBytes,
                                      uses_dqn ? static_cast<int>(feedback_size_bytes(cfg.k)) : 0,
                                      cfg.feedback_period);
    rec.mean_reconstruction_error = err_sum / static_cast<double>(outcomes.size());
    rec.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
    if (trace) {
        trace->mean_map_change =
            map_change_count > 0 ? map_change_sum / map_change_count : 0.0;
        if (uses_dqn) trace->final_model = std::make_shared<ImportanceModel>(model);
    }
    return rec;
}

std::vector<MetricsRecord> run_matrix(const ExperimentConfig& cfg) {
    if (cfg.methods.empty() || cfg.rates.empty() || cfg.seeds.empty()) {
        throw std::invalid_argument("methods, rates, and seeds must be non-empty");
    }
    fs::create_directories(cfg.output_dir);
    {
        std::ofstream snap(fs::path(cfg.output_dir) / "config_snapshot.txt");
        if (!snap) throw std::runtime_error("cannot write config snapshot");
        save_config(cfg, snap);
    }

    std::vector<MetricsRecord> records;
    records.reserve(cfg.methods.size() * cfg.rates.size() * cfg.seeds.size());
    for (Method method : cfg.methods) {
        for (double rate : cfg.rates) {
            for (uint64_t seed : cfg.seeds) {
                EpisodeTrace trace;
                records.push_back(run_episode(cfg, method, rate, seed, &trace));
                if (method_uses_dqn(method) && !trace.final_map.empty()) {
                    char name[128];
                    std::snprintf(name, sizeof name, "heatmap_%s_rate%03d_seed%llu.pgm",
                                  method_name(method),
                                  static_cast<int>(std::lround(rate * 100)),
                                  static_cast<unsigned long long>(seed));
                    export_heatmap(trace.final_map, cfg.k,
                                   (fs::path(cfg.output_dir) / name).string());
                }
            }
        }
    }

    write_records_csv(records, (fs::path(cfg.output_dir) / "results.csv").string());

    {
        std::ofstream out(fs::path(cfg.output_dir) / "summary.txt");
        out << summary_table(cfg, records);
    }

    // bandwidth view: seed-averaged bits per evaluated frame
    {
        std::ofstream out(fs::path(cfg.output_dir) / "bits_vs_rate.csv");
        out << "method,rate,bits_per_frame\n";
        for (Method method : cfg.methods) {
            for (double rate : cfg.rates) {
                double bits = 0.0;
                int count = 0;
                for (const MetricsRecord& r : records) {
                    if (r.method == method && r.rate == rate) {
                        bits += static_cast<double>(r.bits_total) / r.frames;
                        ++count;
                    }
                }
                out << method_name(method) << "," << format_double(rate) << ","
                    << format_double(bits / count) << "\n";
            }
        }
    }
    return records;
}

std::string summary_table(const ExperimentConfig& cfg, const std::vector<MetricsRecord>& records) {
    std::ostringstream out;
    out << "seed-averaged scores (" << cfg.seeds.size() << " seeds)\n\n";
    out << "rate      metric     ";
    for (Method m : cfg.methods) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%-15s", method_name(m));
        out << buf;
    }
    out << "\n";
    for (double rate : cfg.rates) {
        for (int metric = 0; metric < 2; ++metric) {
            char head[32];
            if (metric == 0) {
                std::snprintf(head, sizeof head, "%-10.4g%-11s", rate * 100, "F1");
            } else {
                std::snprintf(head, sizeof head, "%-10s%-11s", "", "precision");
            }
            out << head;
            for (Method method : cfg.methods) {
                double sum = 0.0;
                int count = 0;
                for (const MetricsRecord& r : records) {
                    if (r.method == method && r.rate == rate) {
                        sum += metric == 0 ? r.f1 : r.precision;
                        ++count;
                    }
                }
                char buf[32];
                if (count > 0) {
                    std::snprintf(buf, sizeof buf, "%-15.3f", sum / count);
                } else {
                    std::snprintf(buf, sizeof buf, "%-15s", "-");
                }
                out << buf;
            }
            out << "\n";
        }
    }
    return out.str();
}

void write_records_csv(const std::vector<MetricsRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "method,rate,seed,f1,precision,recall,bits_total,frames,"
           "mean_reconstruction_error,wall_time_s\n";
    for (const MetricsRecord& r : records) {
        out << method_name(r.method) << "," << format_double(r.rate) << "," << r.seed << ","
            << format_double(r.f1) << "," << format_double(r.precision) << ","
            << format_double(r.recall) << "," << r.bits_total << "," << r.frames << ","
            << format_double(r.mean_reconstruction_error) << ","
            << format_double(r.wall_time_s) << "\n";
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("expected a boolean, got '" + v + "'");
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "k") cfg.k = std::stoi(value);
            else if (key == "rates") {
                cfg.rates.clear();
                for (const auto& r : split_list(value)) cfg.rates.push_back(std::stod(r));
            } else if (key == "methods") {
                cfg.methods.clear();
                for (const auto& m : split_list(value)) {
                    const auto method = method_from_name(m);
                    if (!method) throw std::runtime_error("unknown method '" + m + "'");
                    cfg.methods.push_back(*method);
                }
            } else if (key == "seeds") {
                cfg.seeds.clear();
                for (const auto& s : split_list(value)) cfg.seeds.push_back(std::stoull(s));
            } else if (key == "loss_probability") cfg.loss_probability = std::stod(value);
            else if (key == "reorder") cfg.reorder = parse_bool(value);
            else if (key == "theta") cfg.theta = std::stod(value);
            else if (key == "gamma") cfg.q.gamma = std::stod(value);
            else if (key == "lambda") cfg.q.lambda = std::stod(value);
            else if (key == "alpha") cfg.q.alpha = std::stod(value);
            else if (key == "reward_overlap") cfg.q.reward_overlap = std::stod(value);
            else if (key == "reward_motion") cfg.q.reward_motion = std::stod(value);
            else if (key == "bins") cfg.q.bins = std::stoi(value);
            else if (key == "bootstrap_frames") cfg.bootstrap_frames = std::stoi(value);
            else if (key == "feedback_period") cfg.feedback_period = std::stoi(value);
            else if (key == "output_dir") cfg.output_dir = value;
            else if (key == "dataset_dir") cfg.dataset_dir = value;
            else if (key == "scene.width") cfg.scene.width = std::stoi(value);
            else if (key == "scene.height") cfg.scene.height = std::stoi(value);
            else if (key == "scene.frames") cfg.scene.frame_count = std::stoi(value);
            else if (key == "scene.object_w") cfg.scene.object_w = std::stoi(value);
            else if (key == "scene.object_h") cfg.scene.object_h = std::stoi(value);
            else if (key == "scene.x0") cfg.scene.x0 = std::stoi(value);
            else if (key == "scene.y0") cfg.scene.y0 = std::stoi(value);
            else if (key == "scene.dx") cfg.scene.dx = std::stoi(value);
            else if (key == "scene.dy") cfg.scene.dy = std::stoi(value);
            else if (key == "scene.jitter") cfg.scene.jitter = std::stoi(value);
            else if (key == "scene.background_seed") cfg.scene.background_seed = std::stoull(value);
            else if (key == "scene.object_seed") cfg.scene.object_seed = std::stoull(value);
            else if (key == "scene.jitter_seed") cfg.scene.jitter_seed = std::stoull(value);
            else if (key == "scene.background_lo") cfg.scene.background_lo = static_cast<uint8_t>(std::stoi(value));
            else if (key == "scene.background_hi") cfg.scene.background_hi = static_cast<uint8_t>(std::stoi(value));
            else if (key == "scene.object_lo") cfg.scene.object_lo = static_cast<uint8_t>(std::stoi(value));
            else if (key == "scene.object_hi") cfg.scene.object_hi = static_cast<uint8_t>(std::stoi(value));
            else throw std::runtime_error("unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    return cfg;
}

void save_config(const ExperimentConfig& cfg, std::ostream& out) {
    out << "# patchlink experiment config\n";
    out << "k = " << cfg.k << "\n";
    out << "rates = ";
    for (size_t i = 0; i < cfg.rates.size(); ++i) {
        out << (i ? "," : "") << format_double(cfg.rates[i]);
    }
    out << "\nmethods = ";
    for (size_t i = 0; i < cfg.methods.size(); ++i) {
        out << (i ? "," : "") << method_name(cfg.methods[i]);
    }
    out << "\nseeds = ";
    for (size_t i = 0; i < cfg.seeds.size(); ++i) out << (i ? "," : "") << cfg.seeds[i];
    out << "\n";
    out << "loss_probability = " << format_double(cfg.loss_probability) << "\n";
    out << "reorder = " << (cfg.reorder ? "true" : "false") << "\n";
    out << "theta = " << format_double(cfg.theta) << "\n";
    out << "gamma = " << format_double(cfg.q.gamma) << "\n";
    out << "lambda = " << format_double(cfg.q.lambda) << "\n";
    out << "alpha = " << format_double(cfg.q.alpha) << "\n";
    out << "reward_overlap = " << format_double(cfg.q.reward_overlap) << "\n";
    out << "reward_motion = " << format_double(cfg.q.reward_motion) << "\n";
    out << "bins = " << cfg.q.bins << "\n";
    out << "bootstrap_frames = " << cfg.bootstrap_frames << "\n";
    out << "feedback_period = " << cfg.feedback_period << "\n";
    out << "output_dir = " << cfg.output_dir << "\n";
    out << "dataset_dir = " << cfg.dataset_dir << "\n";
    out << "scene.width = " << cfg.scene.width << "\n";
    out << "scene.height = " << cfg.scene.height << "\n";
    out << "scene.frames = " << cfg.scene.frame_count << "\n";
    out << "scene.object_w = " << cfg.scene.object_w << "\n";
    out << "scene.object_h = " << cfg.scene.object_h << "\n";
    out << "scene.x0 = " << cfg.scene.x0 << "\n";
    out << "scene.y0 = " << cfg.scene.y0 << "\n";
    out << "scene.dx = " << cfg.scene.dx << "\n";
    out << "scene.dy = " << cfg.scene.dy << "\n";
    out << "scene.jitter = " << cfg.scene.jitter << "\n";
    out << "scene.background_seed = " << cfg.scene.background_seed << "\n";
    out << "scene.object_seed = " << cfg.scene.object_seed << "\n";
    out << "scene.jitter_seed = " << cfg.scene.jitter_seed << "\n";
    out << "scene.background_lo = " << static_cast<int>(cfg.scene.background_lo) << "\n";
    out << "scene.background_hi = " << static_cast<int>(cfg.scene.background_hi) << "\n";
    out << "scene.object_lo = " << static_cast<int>(cfg.scene.object_lo) << "\n";
    out << "scene.object_hi = " << static_cast<int>(cfg.scene.object_hi) << "\n";
}

} // namespace patchlink
