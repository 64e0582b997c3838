#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

#include "sv/error.hpp"
#include "sv/planner.hpp"
#include "sv/remote.hpp"
#include "sv/render.hpp"
#include "sv/scene.hpp"
#include "sv/search.hpp"
#include "sv/synthetic.hpp"
#include "sv/track.hpp"
#include "sv/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitBelowThreshold = 3;

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
        .count();
}

struct BackendSelection {
    std::string planner = "scripted";
    std::string verifier = "local";
    uint64_t seed = 0;
    std::string mode = "planted";  // planted | pool
    int phases = 1;
    std::vector<std::string> variants;  // pool-mode variant names; empty = all
    fs::path planner_cassette;
    fs::path verifier_cassette;
};

sv::ScriptedVariant variant_by_name(const std::string& name) {
    for (const sv::ScriptedVariant v :
         {sv::ScriptedVariant::clean, sv::ScriptedVariant::teleport,
          sv::ScriptedVariant::penetrate, sv::ScriptedVariant::hover, sv::ScriptedVariant::drift})
        if (name == sv::scripted_variant_name(v)) return v;
    throw sv::Error(sv::ErrorCode::ManifestInvalid, "unknown variant: " + name);
}

struct BuiltBackends {
    std::unique_ptr<sv::PlannerBackend> planner;
    std::unique_ptr<sv::VerifierBackend> verifier;

    sv::Backends handles() { return {planner.get(), verifier.get()}; }
};

BuiltBackends build_backends(const BackendSelection& selection) {
    BuiltBackends built;
    if (selection.planner == "scripted") {
        sv::ScriptedPlannerOptions options;
        options.seed = selection.seed;
        options.phases = selection.phases;
        options.mode = selection.mode == "pool" ? sv::ScriptedPlannerOptions::Mode::pool
                                                : sv::ScriptedPlannerOptions::Mode::planted_set;
        if (!selection.variants.empty()) {
            options.variant_pool.clear();
            for (const std::string& name : selection.variants)
                options.variant_pool.push_back(variant_by_name(name));
        }
        built.planner = std::make_unique<sv::ScriptedPlanner>(options);
    } else if (selection.planner == "remote") {
        sv::EndpointConfig config = sv::EndpointConfig::from_env("PLANNER");
        if (!selection.planner_cassette.empty()) {
            config.cassette_path = selection.planner_cassette;
            config.mode = sv::EndpointConfig::Mode::replay;
        }
        if (config.mode == sv::EndpointConfig::Mode::live && config.api_key.empty())
            throw sv::Error(sv::ErrorCode::AuthError,
                            "remote planner needs PLANNER_API_KEY (or a cassette)");
        built.planner = sv::remote_planner(config);
    } else {
        throw sv::Error(sv::ErrorCode::ManifestInvalid,
                        "unknown planner backend: " + selection.planner);
    }

    if (selection.verifier == "local") {
        built.verifier = std::make_unique<sv::LocalVerifier>();
    } else if (selection.verifier == "remote") {
        sv::EndpointConfig config = sv::EndpointConfig::from_env("VERIFIER");
        if (!selection.verifier_cassette.empty()) {
            config.cassette_path = selection.verifier_cassette;
            config.mode = sv::EndpointConfig::Mode::replay;
        }
        if (config.mode == sv::EndpointConfig::Mode::live && config.api_key.empty())
            throw sv::Error(sv::ErrorCode::AuthError,
                            "remote verifier needs VERIFIER_API_KEY (or a cassette)");
        built.verifier = std::make_unique<sv::RemoteVerifier>(config);
    } else {
        throw sv::Error(sv::ErrorCode::ManifestInvalid,
                        "unknown verifier backend: " + selection.verifier);
    }
    return built;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw sv::Error(sv::ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!text.empty() && text.back() != '\n') out << "\n";
}

json selected_plan_json(const sv::PipelineResult& result, const sv::SceneBundle& scene) {
    json doc;
    doc["prompt"] = result.plan.source_prompt;
    doc["resolution"] = {scene.width(), scene.height()};
    doc["segments"] = json::array();
    for (const sv::SubInstructionResult& segment : result.segments) {
        json frames = json::array();
        for (const auto& frame : segment.selected.frames) {
            json f = json::object();
            for (const auto& [id, box] : frame)
                f[id] = {box.x_min, box.y_min, box.x_max, box.y_max};
            frames.push_back(f);
        }
        doc["segments"].push_back({{"index", segment.sub.index},
                                   {"frame_budget", segment.sub.frame_budget},
                                   {"moving", segment.sub.moving_ids},
                                   {"frames", frames}});
    }
    return doc;
}

void write_run_outputs(const sv::PipelineResult& result, const sv::SceneBundle& scene,
                       const sv::SearchConfig& config, const fs::path& out_dir, bool gif,
                       int track_frames, double track_fps) {
    fs::create_directories(out_dir);
    write_text(out_dir / "plan.json", sv::serialize_plan(result.plan));
    write_text(out_dir / "trace.json", sv::trace_to_json(result, config.weights));

    for (const sv::SubInstructionResult& segment : result.segments) {
        const fs::path phase_dir =
            out_dir / ("phase_" + std::to_string(segment.sub.index + 1));
        for (const sv::SearchTrace::Round& round : segment.trace.rounds) {
            const fs::path round_dir =
                round.attempt == 1 ? phase_dir
                                   : phase_dir / ("round_" + std::to_string(round.attempt));
            for (const sv::SearchTrace::CandidateRecord& record : round.candidates) {
                const fs::path cand_dir =
                    round_dir /
                    ("candidate_" + std::to_string(record.candidate.candidate_index));
                fs::create_directories(cand_dir);
                write_text(cand_dir / "candidate.json", sv::serialize_candidate(record.candidate));
                if (record.report) {
                    const sv::VideoSketch sketch = sv::render_sketch(record.candidate, scene);
                    sv::encode_sketch(sketch, cand_dir / "frames");
                    write_text(cand_dir / "report.json",
                               sv::report_to_json(*record.report, config.weights));
                }
            }
        }

        const fs::path sel_dir =
            out_dir / "selected" / ("phase_" + std::to_string(segment.sub.index + 1));
        fs::create_directories(sel_dir);
        write_text(sel_dir / "candidate.json", sv::serialize_candidate(segment.selected));
        write_text(sel_dir / "report.json", sv::report_to_json(segment.report, config.weights));
        sv::encode_sketch(segment.sketch, sel_dir / "frames", gif);
    }
    write_text(out_dir / "selected" / "plan_selected.json",
               selected_plan_json(result, scene).dump(2));

    const std::vector<sv::SparseTrack> sparse = sv::concat_plan(result.segments);
    std::vector<sv::DenseTrack> dense;
    for (const sv::SparseTrack& track : sparse)
        dense.push_back(sv::interpolate_dense(track, track_frames));
    sv::TrackFileMeta meta;
    meta.fps = track_fps;
    meta.width = scene.width();
    meta.height = scene.height();
    meta.prompt = result.plan.source_prompt;
    sv::write_track_file(dense, out_dir / "track.json", meta);
}

// --- subcommands ---------------------------------------------------------------

int cmd_run(const fs::path& scene_dir, const std::string& prompt,
            const BackendSelection& selection, const sv::SearchConfig& config,
            const fs::path& out_root, std::string run_id, bool gif, int track_frames,
            double track_fps, bool dry_run, bool submit) {
    const auto t_total = std::chrono::steady_clock::now();
    const sv::SceneBundle scene = sv::load_scene_bundle(scene_dir);

    if (run_id.empty())
        run_id = selection.planner == "scripted" ? "run-seed" + std::to_string(selection.seed)
                                                 : "run";
    const fs::path out_dir = out_root / run_id;

    BuiltBackends backends = build_backends(selection);

    const auto t_search = std::chrono::steady_clock::now();
    const sv::PipelineResult result =
        sv::run_pipeline(prompt, scene, backends.handles(), config);
    std::cout << "search: " << elapsed_ms(t_search) << " ms\n";

    for (const sv::SubInstructionResult& segment : result.segments)
        std::cout << "phase " << segment.sub.index + 1 << ": combined "
                  << segment.report.combined
                  << (segment.trace.below_threshold ? " (below threshold, best effort)" : "")
                  << "\n";

    const auto t_write = std::chrono::steady_clock::now();
    write_run_outputs(result, scene, config, out_dir, gif, track_frames, track_fps);
    std::cout << "export: " << elapsed_ms(t_write) << " ms\n";

    if (dry_run || submit) {
        sv::EndpointConfig generator = sv::EndpointConfig::from_env("GENERATOR");
        const sv::GeneratorJob job = sv::generator_client_stub(
            out_dir / "track.json", scene.initial_frame, generator, dry_run);
        if (dry_run)
            std::cout << "generator payload: " << job.payload_path.string() << "\n";
        else
            std::cout << "generator job: " << job.job_id << "\n";
    }

    std::cout << "total: " << elapsed_ms(t_total) << " ms\n";
    std::cout << "outputs: " << out_dir.string() << "\n";
    return result.below_threshold ? kExitBelowThreshold : 0;
}

int cmd_make_synthetic(const sv::SyntheticSceneSpec& spec, const fs::path& out_dir) {
    const sv::SceneBundle scene = sv::make_synthetic_scene(spec);
    sv::save_scene_bundle(scene, out_dir);
    std::cout << "scene bundle: " << out_dir.string() << "\n";
    return 0;
}

int cmd_k_sweep(const std::vector<int>& k_values, int seeds, const sv::SearchConfig& base_config,
                const sv::SyntheticSceneSpec& base_spec, const fs::path& csv_path) {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream csv;
    csv << "K,seeds,mean_score,std\n";

    for (const int k : k_values) {
        if (k < 1) throw sv::Error(sv::ErrorCode::ManifestInvalid, "k values must be >= 1");
        double sum = 0.0, sum_sq = 0.0;
        for (int seed = 0; seed < seeds; ++seed) {
            sv::SyntheticSceneSpec spec = base_spec;
            spec.seed = static_cast<uint64_t>(seed);
            const sv::SceneBundle scene = sv::make_synthetic_scene(spec);

            sv::ScriptedPlannerOptions options;
            options.seed = static_cast<uint64_t>(seed);
            options.mode = sv::ScriptedPlannerOptions::Mode::pool;
            sv::ScriptedPlanner planner(options);
            sv::LocalVerifier verifier;

            sv::SearchConfig config = base_config;
            config.k = k;
            const sv::PipelineResult result = sv::run_pipeline(
                "k-sweep", scene, {&planner, &verifier}, config);
            const double score = result.segments.front().report.combined;
            sum += score;
            sum_sq += score * score;
        }
        const double mean = sum / seeds;
        const double variance = std::max(0.0, sum_sq / seeds - mean * mean);
        char line[96];
        std::snprintf(line, sizeof(line), "%d,%d,%.9f,%.9f\n", k, seeds, mean,
                      std::sqrt(variance));
        csv << line;
        std::cout << "K=" << k << ": mean " << mean << " (std " << std::sqrt(variance) << ")\n";
    }

    if (!csv_path.empty()) {
        write_text(csv_path, csv.str());
        std::cout << "csv: " << csv_path.string() << "\n";
    } else {
        std::cout << csv.str();
    }
    std::cout << "k-sweep: " << elapsed_ms(t0) << " ms\n";
    return 0;
}

int cmd_verify_only(const fs::path& scene_dir, fs::path candidate_path, const fs::path& out_path,
                    const sv::VerifierWeights& weights) {
    const sv::SceneBundle scene = sv::load_scene_bundle(scene_dir);
    if (fs::is_directory(candidate_path)) candidate_path /= "candidate.json";
    std::ifstream in(candidate_path);
    if (!in)
        throw sv::Error(sv::ErrorCode::IoError, "cannot read " + candidate_path.string());
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    // The sub-instruction is reconstructed from the candidate itself: the
    // moving set comes from frame 0, the frame budget from the frame count,
    // the goal from the scene manifest.
    sv::SubInstruction probe;
    probe.frame_budget = 2;
    sv::TrajectoryCandidate shape;
    try {
        const json doc = json::parse(raw);
        probe.frame_budget = static_cast<int>(doc.at("frames").size());
        for (const auto& item : doc.at("frames").at(0).items())
            probe.moving_ids.push_back(item.key());
    } catch (const json::exception& e) {
        throw sv::Error(sv::ErrorCode::ParseError, std::string("candidate file: ") + e.what());
    }
    probe.text = "verify-only";
    probe.goal = scene.goal;
    if (!probe.goal)
        throw sv::Error(sv::ErrorCode::ManifestInvalid,
                        "scene manifest has no goal; verify-only needs one");

    const sv::TrajectoryCandidate candidate = sv::parse_candidate_json(raw, probe);
    const sv::VideoSketch sketch = sv::render_sketch(candidate, scene);
    sv::LocalVerifier verifier;
    const sv::VerificationReport report =
        verifier.verify(sketch, candidate, probe, scene, weights);

    const std::string text = sv::report_to_json(report, weights);
    if (out_path.empty())
        std::cout << text << "\n";
    else
        write_text(out_path, text);
    return 0;
}

int cmd_export(const fs::path& selected_path, const fs::path& out_path, int track_frames,
               double fps, const std::string& prompt_override, bool dry_run) {
    std::ifstream in(selected_path);
    if (!in) throw sv::Error(sv::ErrorCode::IoError, "cannot read " + selected_path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw sv::Error(sv::ErrorCode::ParseError, std::string("selected plan: ") + e.what());
    }

    std::vector<sv::SubInstructionResult> segments;
    for (const json& entry : doc.at("segments")) {
        sv::SubInstructionResult segment;
        segment.sub.index = entry.at("index").get<int>();
        segment.sub.frame_budget = entry.at("frame_budget").get<int>();
        for (const json& id : entry.at("moving"))
            segment.sub.moving_ids.push_back(id.get<std::string>());
        for (const json& frame : entry.at("frames")) {
            std::map<std::string, sv::BBox> boxes;
            for (const auto& item : frame.items()) {
                const json& b = item.value();
                boxes[item.key()] = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                                     b[3].get<double>()};
            }
            segment.selected.frames.push_back(std::move(boxes));
        }
        segments.push_back(std::move(segment));
    }

    const std::vector<sv::SparseTrack> sparse = sv::concat_plan(segments);
    std::vector<sv::DenseTrack> dense;
    for (const sv::SparseTrack& track : sparse)
        dense.push_back(sv::interpolate_dense(track, track_frames));

    sv::TrackFileMeta meta;
    meta.fps = fps;
    if (doc.contains("resolution") && doc["resolution"].is_array()) {
        meta.width = doc["resolution"][0].get<int>();
        meta.height = doc["resolution"][1].get<int>();
    }
    meta.prompt = prompt_override.empty() ? doc.value("prompt", "") : prompt_override;
    sv::write_track_file(dense, out_path, meta);
    std::cout << "track: " << out_path.string() << "\n";

    if (dry_run) {
        sv::Image placeholder(1, 1, 3);
        const sv::GeneratorJob job = sv::generator_client_stub(
            out_path, placeholder, sv::EndpointConfig::from_env("GENERATOR"), true);
        std::cout << "generator payload: " << job.payload_path.string() << "\n";
    }
    return 0;
}

void apply_config_file(const fs::path& path, BackendSelection& selection,
                       sv::SearchConfig& config, CLI::App* cmd) {
    std::ifstream in(path);
    if (!in) throw sv::Error(sv::ErrorCode::IoError, "cannot read config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw sv::Error(sv::ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    auto unset = [&](const char* flag) {
        const CLI::Option* opt = cmd->get_option_no_throw(flag);
        return opt == nullptr || opt->count() == 0;
    };
    if (doc.contains("backend") && unset("--backend"))
        selection.planner = doc["backend"].get<std::string>();
    if (doc.contains("verifier") && unset("--verifier"))
        selection.verifier = doc["verifier"].get<std::string>();
    if (doc.contains("seed") && unset("--seed")) selection.seed = doc["seed"].get<uint64_t>();
    if (doc.contains("mode") && unset("--mode")) selection.mode = doc["mode"].get<std::string>();
    if (doc.contains("phases") && unset("--phases"))
        selection.phases = doc["phases"].get<int>();
    if (doc.contains("k") && unset("--k")) config.k = doc["k"].get<int>();
    if (doc.contains("tau") && unset("--tau")) config.tau = doc["tau"].get<double>();
    if (doc.contains("rounds") && unset("--rounds"))
        config.max_rounds = doc["rounds"].get<int>();
    if (doc.contains("min_diversity") && unset("--min-diversity"))
        config.min_diversity = doc["min_diversity"].get<double>();
    if (doc.contains("weights")) {
        const json& w = doc["weights"];
        if (w.contains("semantic")) config.weights.lambda_sem = w["semantic"].get<double>();
        if (w.contains("physics")) config.weights.lambda_phys = w["physics"].get<double>();
        if (w.contains("laws"))
            for (size_t i = 0; i < 4 && i < w["laws"].size(); ++i)
                config.weights.lambda_laws[i] = w["laws"][i].get<double>();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verifier-guided test-time motion planning for trajectory-conditioned video "
                 "generation"};
    app.require_subcommand(1);

    // run ------------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Plan, search, verify and export for one scene");
    fs::path run_scene, run_out = "out", run_config_path;
    std::string run_prompt, run_id;
    BackendSelection selection;
    sv::SearchConfig config;
    bool gif = false, dry_run = false, submit = false;
    int track_frames = sv::kOutputFrames;
    double track_fps = 16.0;
    run->add_option("--scene", run_scene, "Scene bundle directory")->required();
    run->add_option("--prompt", run_prompt, "Motion instruction")->required();
    run->add_option("--out", run_out, "Output root directory");
    run->add_option("--run-id", run_id, "Run directory name (default derived from seed)");
    run->add_option("--config", run_config_path, "JSON config file");
    run->add_option("--backend", selection.planner, "Planner backend: scripted|remote");
    run->add_option("--verifier", selection.verifier, "Verifier backend: local|remote");
    run->add_option("--seed", selection.seed, "Seed for the scripted backend");
    run->add_option("--mode", selection.mode, "Scripted candidate mode: planted|pool");
    run->add_option("--phases", selection.phases, "Scripted plan phases (1..4)");
    run->add_option("--variants", selection.variants,
                    "Pool-mode variant set (clean, teleport, penetrate, hover, drift)");
    run->add_option("--planner-cassette", selection.planner_cassette,
                    "Replay cassette for the remote planner");
    run->add_option("--verifier-cassette", selection.verifier_cassette,
                    "Replay cassette for the remote verifier");
    run->add_option("--k", config.k, "Candidates per round");
    run->add_option("--tau", config.tau, "Quality threshold");
    run->add_option("--rounds", config.max_rounds, "Max sampling rounds");
    run->add_option("--min-diversity", config.min_diversity, "Diversity filter distance");
    run->add_option("--lambda-sem", config.weights.lambda_sem, "Semantic weight");
    run->add_option("--lambda-phys", config.weights.lambda_phys, "Physics weight");
    run->add_option("--frames", track_frames, "Dense track length");
    run->add_option("--fps", track_fps, "Track file fps metadata");
    run->add_flag("--gif", gif, "Also write GIF previews of selected sketches");
    run->add_flag("--dry-run", dry_run, "Write the generator request payload to disk");
    run->add_flag("--submit", submit, "Post the track to the generation endpoint");

    // make-synthetic ---------------------------------------------------------
    auto* make = app.add_subcommand("make-synthetic", "Write a seeded synthetic scene bundle");
    sv::SyntheticSceneSpec spec;
    fs::path make_out;
    std::string shape = "square";
    bool no_obstacle = false, no_direction = false;
    make->add_option("--out", make_out, "Bundle directory")->required();
    make->add_option("--seed", spec.seed, "Scene seed");
    make->add_option("--width", spec.width, "Canvas width");
    make->add_option("--height", spec.height, "Canvas height");
    make->add_option("--object-size", spec.object_size_px, "Object size in pixels");
    make->add_option("--shape", shape, "Object shape: square|disc");
    make->add_flag("--no-obstacle", no_obstacle, "Skip the floating obstacle");
    make->add_flag("--no-direction", no_direction, "Omit the goal direction term");

    // k-sweep ----------------------------------------------------------------
    auto* sweep = app.add_subcommand("k-sweep", "Mean selected score across K values");
    std::vector<int> k_values = {1, 2, 3, 5, 8};
    int sweep_seeds = 200;
    fs::path sweep_csv;
    sv::SearchConfig sweep_config;
    sweep_config.max_rounds = 1;  // isolate the best-of-K effect
    sweep->add_option("--k", k_values, "K values to sweep");
    sweep->add_option("--seeds", sweep_seeds, "Seeds per K");
    sweep->add_option("--out", sweep_csv, "CSV output path");
    sweep->add_option("--tau", sweep_config.tau, "Quality threshold");
    sweep->add_option("--rounds", sweep_config.max_rounds, "Max sampling rounds");

    // verify-only -------------------------------------------------------------
    auto* verify = app.add_subcommand("verify-only", "Score one candidate against a scene");
    fs::path verify_scene, verify_candidate, verify_out;
    verify->add_option("--scene", verify_scene, "Scene bundle directory")->required();
    verify->add_option("--candidate", verify_candidate,
                       "Candidate JSON file (or a directory containing candidate.json)")
        ->required();
    verify->add_option("--out", verify_out, "Report output path (default stdout)");

    // export -------------------------------------------------------------------
    auto* exp = app.add_subcommand("export", "Convert a selected plan into a dense track file");
    fs::path export_selected, export_out = "track.json";
    int export_frames = sv::kOutputFrames;
    double export_fps = 16.0;
    std::string export_prompt;
    bool export_dry_run = false;
    exp->add_option("--selected", export_selected, "selected/plan_selected.json from a run")
        ->required();
    exp->add_option("--out", export_out, "Track file path");
    exp->add_option("--frames", export_frames, "Dense track length");
    exp->add_option("--fps", export_fps, "Track file fps metadata");
    exp->add_option("--prompt", export_prompt, "Prompt override");
    exp->add_flag("--dry-run", export_dry_run, "Also write the generator request payload");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (!run_config_path.empty())
                apply_config_file(run_config_path, selection, config, run);
            return cmd_run(run_scene, run_prompt, selection, config, run_out, run_id, gif,
                           track_frames, track_fps, dry_run, submit);
        }
        if (make->parsed()) {
            spec.shape = shape == "disc" ? sv::SyntheticSceneSpec::Shape::disc
                                         : sv::SyntheticSceneSpec::Shape::square;
            spec.with_obstacle = !no_obstacle;
            spec.emit_direction = !no_direction;
            return cmd_make_synthetic(spec, make_out);
        }
        if (sweep->parsed()) {
            sv::SyntheticSceneSpec sweep_spec;
            return cmd_k_sweep(k_values, sweep_seeds, sweep_config, sweep_spec, sweep_csv);
        }
        if (verify->parsed()) {
            sv::VerifierWeights weights;
            return cmd_verify_only(verify_scene, verify_candidate, verify_out, weights);
        }
        if (exp->parsed())
            return cmd_export(export_selected, export_out, export_frames, export_fps,
                              export_prompt, export_dry_run);
    } catch (const sv::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return sv::error_exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
