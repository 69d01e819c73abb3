// patchlink CLI: experiment runner, scene generator, heatmap export, and a
// loopback-or-LAN UDP sender/receiver pair.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "patchlink/harness.hpp"
#include "patchlink/pgm_io.hpp"
#include "patchlink/reconstruct.hpp"
#include "patchlink/scheduler.hpp"
#include "patchlink/socket_runner.hpp"

namespace fs = std::filesystem;
using namespace patchlink;

namespace {

ExperimentConfig config_from(const std::string& path) {
    return path.empty() ? ExperimentConfig{} : load_config(path);
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
    ExperimentConfig cfg = config_from(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    const auto records = run_matrix(cfg);
    std::cout << summary_table(cfg, records);
    std::cout << "\n" << records.size() << " records written to " << cfg.output_dir << "\n";
    return 0;
}

int cmd_scene_gen(const std::string& out_dir, const SceneConfig& scene) {
    fs::create_directories(out_dir);
    const Scene result = scene_generate(scene);
    std::map<uint32_t, BoundingBox> boxes;
    for (size_t i = 0; i < result.frames.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "frame_%05zu.pgm", i);
        save_pgm(result.frames[i], (fs::path(out_dir) / name).string());
        boxes[static_cast<uint32_t>(i)] = result.boxes[i];
    }
    save_annotations(boxes, (fs::path(out_dir) / "annotations.csv").string());
    std::cout << result.frames.size() << " frames written to " << out_dir << "\n";
    return 0;
}

int cmd_heatmap(const std::string& config_path, const std::string& method_str, double rate,
                uint64_t seed, const std::string& out_path, const std::string& model_path) {
    const ExperimentConfig cfg = config_from(config_path);
    const auto method = method_from_name(method_str);
    if (!method || !method_uses_dqn(*method)) {
        std::cerr << "heatmap needs a dqn method (dqn or dqn+interp)\n";
        return 2;
    }
    EpisodeTrace trace;
    const MetricsRecord rec = run_episode(cfg, *method, rate, seed, &trace);
    export_heatmap(trace.final_map, cfg.k, out_path);
    std::cout << "episode F1 " << rec.f1 << ", heatmap written to " << out_path << "\n";
    if (!model_path.empty() && trace.final_model) {
        trace.final_model->save(model_path);
        std::cout << "model checkpoint written to " << model_path << "\n";
    }
    return 0;
}

int cmd_send(const std::string& host, uint16_t port, const std::string& config_path, double rate,
             const std::string& policy_str, int fps, double feedback_wait_ms) {
    const ExperimentConfig cfg = config_from(config_path);

    std::vector<Frame> frames;
    if (!cfg.dataset_dir.empty()) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(cfg.dataset_dir)) {
            if (entry.path().extension() == ".pgm") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (size_t i = 0; i < files.size(); ++i) {
            Frame f = load_pgm(files[i].string());
            f.index = static_cast<uint32_t>(i);
            frames.push_back(pad_to_grid(f, cfg.k));
        }
    } else {
        Scene scene = scene_generate(cfg.scene);
        for (Frame& f : scene.frames) frames.push_back(pad_to_grid(f, cfg.k));
    }
    if (frames.empty()) {
        std::cerr << "nothing to send\n";
        return 2;
    }

    ScheduleConfig sched;
    sched.rate = rate;
    sched.bootstrap_frames = cfg.bootstrap_frames;
    sched.policy = policy_str == "random" ? Policy::random : Policy::dqn;
    sched.seed = cfg.seeds.empty() ? 1 : cfg.seeds.front();
    sched.k = cfg.k;

    SenderConfig scfg;
    scfg.host = host;
    scfg.port = port;
    scfg.k = cfg.k;
    scfg.feedback_wait_ms = feedback_wait_ms;
    scfg.pace_fps = fps;

    const SenderStats stats = socket_send(
        scfg, frames, [&](uint32_t n, const std::optional<Mask>& feedback) {
            return schedule(n, sched, feedback);
        });
    std::cout << "sent " << stats.datagrams_sent << " datagrams over " << frames.size()
              << " frames, received " << stats.feedback_received << " feedback messages\n";
    return 0;
}

int cmd_recv(uint16_t port, int width, int height, const std::string& config_path, int frame_count,
             double deadline_ms, double idle_timeout_ms, const std::string& out_dir, bool interp,
             double rate, const std::string& annotations_path) {
    ExperimentConfig cfg = config_from(config_path);
    const Frame probe = pad_to_grid(Frame(0, width, height), cfg.k);

    ReceiverConfig rcfg;
    rcfg.port = port;
    rcfg.k = cfg.k;
    rcfg.width = probe.width;
    rcfg.height = probe.height;
    rcfg.frame_count = frame_count;
    rcfg.frame_deadline_ms = deadline_ms;
    rcfg.idle_timeout_ms = idle_timeout_ms;

    std::map<uint32_t, BoundingBox> annotations;
    if (!annotations_path.empty()) annotations = load_annotations(annotations_path);
    if (!out_dir.empty()) fs::create_directories(out_dir);

    const GridSpec grid = GridSpec::for_frame(rcfg.width, rcfg.height, cfg.k);
    const int cells = grid.cell_count();
    ImportanceModel model(cfg.k, cfg.q);
    Frame prev_recon;
    bool have_recon = false;
    std::vector<CellState> prev_states;
    std::optional<std::vector<double>> prev_probs;
    Mask prev_mask = Mask::full(cfg.k);

    const int finalized = socket_receive(rcfg, [&](uint32_t index, const Frame& assembled,
                                                   const Mask& received) -> std::optional<Mask> {
        const Frame recon =
            interp ? interpolate(assembled, received, have_recon ? &prev_recon : nullptr)
                   : assembled;
        if (!out_dir.empty()) {
            char name[64];
            std::snprintf(name, sizeof name, "recon_%05u.pgm", index);
            save_pgm(recon, (fs::path(out_dir) / name).string());
        }

        // importance update; overlap rewards need annotations, motion is free
        std::optional<BoundingBox> gt;
        if (auto it = annotations.find(index); it != annotations.end()) {
            gt = clip_box(it->second, rcfg.width, rcfg.height);
        }
        std::vector<double> motion(static_cast<size_t>(cells), 0.0);
        if (have_recon) {
            for (int i = 0; i < cells; ++i) {
                const CellId cell = grid.cell_at(i);
                long long sum = 0;
                for (int y = cell.row * grid.patch_h; y < (cell.row + 1) * grid.patch_h; ++y)
                    for (int x = cell.col * grid.patch_w; x < (cell.col + 1) * grid.patch_w; ++x)
                        sum += std::abs(static_cast<int>(recon.at(x, y)) -
                                        static_cast<int>(prev_recon.at(x, y)));
                motion[static_cast<size_t>(i)] =
                    static_cast<double>(sum) / (255.0 * grid.patch_pixels());
            }
        }
        RewardInput reward_input{gt, motion};
        std::vector<CellState> states;
        for (int i = 0; i < cells; ++i) {
            const CellId cell = grid.cell_at(i);
            const double o = gt ? cell_overlap(cell, grid, *gt) : 0.0;
            states.push_back(model.make_state(cell, o, motion[static_cast<size_t>(i)]));
        }
        if (!prev_states.empty()) {
            std::vector<Transition> batch(static_cast<size_t>(cells));
            for (int i = 0; i < cells; ++i) {
                batch[static_cast<size_t>(i)] =
                    Transition{model.state_index(prev_states[static_cast<size_t>(i)]),
                               prev_mask.test(i) ? Action::transmit : Action::skip,
                               reward(grid.cell_at(i), reward_input, grid, cfg.q),
                               model.state_index(states[static_cast<size_t>(i)])};
            }
            model.train_step(batch, prev_probs ? &*prev_probs : nullptr);
        }
        const auto probs = probability_map(model.weight_map(states));
        prev_probs = probs;
        prev_states = std::move(states);
        prev_mask = received;
        prev_recon = recon;
        have_recon = true;
        return select_top(probs, rate, cfg.k, index);
    });

    std::cout << "finalized " << finalized << " frames\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"selective patch streaming simulator"};
    app.require_subcommand(1);

    // run
    std::string run_config, run_out;
    auto* run = app.add_subcommand("run", "run the experiment matrix from a config file");
    run->add_option("--config", run_config, "config file (key = value)");
    run->add_option("--out", run_out, "override the output directory");

    // scene-gen
    std::string scene_out = "scene";
    SceneConfig scene;
    auto* scene_gen = app.add_subcommand("scene-gen", "write a synthetic scene as PGM + CSV");
    scene_gen->add_option("--out", scene_out, "output directory");
    scene_gen->add_option("--width", scene.width);
    scene_gen->add_option("--height", scene.height);
    scene_gen->add_option("--frames", scene.frame_count);
    scene_gen->add_option("--object-w", scene.object_w);
    scene_gen->add_option("--object-h", scene.object_h);
    scene_gen->add_option("--dx", scene.dx);
    scene_gen->add_option("--dy", scene.dy);
    scene_gen->add_option("--jitter", scene.jitter);
    scene_gen->add_option("--background-seed", scene.background_seed);
    scene_gen->add_option("--object-seed", scene.object_seed);

    // heatmap
    std::string hm_config, hm_method = "dqn+interp", hm_out = "heatmap.pgm", hm_model;
    double hm_rate = 0.5;
    uint64_t hm_seed = 1;
    auto* heatmap = app.add_subcommand("heatmap", "train one episode and export its heatmap");
    heatmap->add_option("--config", hm_config);
    heatmap->add_option("--method", hm_method, "dqn or dqn+interp");
    heatmap->add_option("--rate", hm_rate);
    heatmap->add_option("--seed", hm_seed);
    heatmap->add_option("--out", hm_out);
    heatmap->add_option("--save-model", hm_model, "write the trained model checkpoint");

    // send
    std::string send_host = "127.0.0.1", send_config, send_policy = "dqn";
    uint16_t send_port = 9700;
    double send_rate = 0.5, send_wait = 50.0;
    int send_fps = 30;
    auto* send = app.add_subcommand("send", "stream frames over UDP");
    send->add_option("--host", send_host);
    send->add_option("--port", send_port);
    send->add_option("--config", send_config);
    send->add_option("--rate", send_rate, "selection rate in (0,1]");
    send->add_option("--policy", send_policy, "dqn (feedback-driven) or random");
    send->add_option("--fps", send_fps, "pacing, 0 = unpaced");
    send->add_option("--feedback-wait-ms", send_wait);

    // recv
    std::string recv_config, recv_out, recv_annotations;
    uint16_t recv_port = 9700;
    int recv_width = 64, recv_height = 64, recv_frames = 200;
    double recv_deadline = 33.0, recv_idle = 10000.0, recv_rate = 0.5;
    bool recv_interp = false;
    auto* recv = app.add_subcommand("recv", "receive, reconstruct, learn, send feedback");
    recv->add_option("--port", recv_port);
    recv->add_option("--width", recv_width);
    recv->add_option("--height", recv_height);
    recv->add_option("--config", recv_config);
    recv->add_option("--frames", recv_frames, "stop after this many frames");
    recv->add_option("--deadline-ms", recv_deadline, "per-frame reassembly deadline");
    recv->add_option("--idle-timeout-ms", recv_idle);
    recv->add_option("--out", recv_out, "directory for reconstructed PGMs");
    recv->add_flag("--interp", recv_interp, "interpolate missing cells");
    recv->add_option("--rate", recv_rate, "feedback mask rate");
    recv->add_option("--annotations", recv_annotations, "CSV enabling overlap rewards");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_config, run_out);
        if (scene_gen->parsed()) return cmd_scene_gen(scene_out, scene);
        if (heatmap->parsed()) {
            return cmd_heatmap(hm_config, hm_method, hm_rate, hm_seed, hm_out, hm_model);
        }
        if (send->parsed()) {
            return cmd_send(send_host, send_port, send_config, send_rate, send_policy, send_fps,
                            send_wait);
        }
        if (recv->parsed()) {
            return cmd_recv(recv_port, recv_width, recv_height, recv_config, recv_frames,
                            recv_deadline, recv_idle, recv_out, recv_interp, recv_rate,
                            recv_annotations);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
