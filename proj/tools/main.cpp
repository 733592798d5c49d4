// Command-line front end wiring the library into the full workflow:
// simulate degraded sequences, register them, reconstruct (single- or
// multi-frame), train the network, run the two-stage cascades, and score
// results against ground truth.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cascsr/cascade.hpp"
#include "cascsr/config.hpp"
#include "cascsr/degradation.hpp"
#include "cascsr/erbpn.hpp"
#include "cascsr/image_io.hpp"
#include "cascsr/lorig.hpp"
#include "cascsr/metrics.hpp"
#include "cascsr/registration.hpp"
#include "cascsr/train.hpp"

namespace {

using namespace cascsr;

LorigConfig lorig_config_from_path(const std::string& path) {
    if (path.empty()) return LorigConfig{};
    return LorigConfig::from_config(KeyValueConfig::from_file(path));
}

struct DegradeArgs {
    std::string input, output;
    int frames = 16;
    int scale = 4;
    double sigma = 1.5;
    int radius = 4;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string shifts = "grid";
};

int run_degrade(const DegradeArgs& a) {
    const ImagePlane hr = load_image_gray(a.input);
    const DegradationSpec spec = make_gaussian_spec(a.scale, a.sigma, a.radius, a.noise, a.seed);
    const ShiftMode mode = a.shifts == "random" ? ShiftMode::Random : ShiftMode::Grid;
    const FrameSequence seq = simulate_sequence(hr, spec, a.frames, mode);
    save_sequence(a.output, seq);
    std::cout << "wrote " << seq.count() << " frames to " << a.output << "\n";
    return 0;
}

struct RegisterArgs {
    std::string seq_dir, out_dir;
    std::string mode = "estimate";
};

int run_register(const RegisterArgs& a) {
    const FrameSequence seq = load_sequence(a.seq_dir);
    const RegistrationMode mode =
        a.mode == "ground_truth" ? RegistrationMode::GroundTruth : RegistrationMode::Estimate;
    const FrameSequence registered = register_sequence(seq, mode);
    const std::string out = a.out_dir.empty() ? a.seq_dir : a.out_dir;
    save_sequence(out, registered);
    std::cout << "registered " << registered.count() << " frames (" << a.mode << ") -> " << out
              << "\n";
    return 0;
}

struct SrArgs {
    std::string method = "bicubic";
    std::string seq_dir, input, model_path, config_path, output, log_path;
    int scale = 0;
};

int run_sr(const SrArgs& a) {
    ImagePlane result;
    if (a.method == "lorig") {
        if (a.seq_dir.empty()) throw ParameterError("sr --method lorig requires --seq");
        const FrameSequence seq = load_sequence(a.seq_dir);
        const int scale = a.scale > 0 ? a.scale : seq.spec.scale;
        std::vector<LorigIterationLog> log;
        result = lorig_reconstruct(seq, lorig_config_from_path(a.config_path), scale,
                                   a.log_path.empty() ? nullptr : &log);
        if (!a.log_path.empty()) write_lorig_log_csv(a.log_path, log);
    } else {
        ImagePlane in;
        if (!a.input.empty())
            in = load_image_gray(a.input);
        else if (!a.seq_dir.empty())
            in = load_sequence(a.seq_dir).reference();
        else
            throw ParameterError("sr: provide --in or --seq");
        if (a.method == "bicubic") {
            const int scale = a.scale > 0 ? a.scale : 4;
            result = clip01(resize_bicubic(in, static_cast<double>(scale)));
        } else if (a.method == "erbpn") {
            if (a.model_path.empty()) throw ParameterError("sr --method erbpn requires --model");
            result = erbpn_forward(in, load_model(a.model_path));
        } else {
            throw ParameterError("sr: unknown method '" + a.method + "'");
        }
    }
    save_image_gray(a.output, result);
    std::cout << "wrote " << a.output << " (" << result.height() << "x" << result.width() << ")\n";
    return 0;
}

struct TrainArgs {
    std::string data_dir, lr_dir, output, loss_csv, checkpoint_prefix;
    std::string mode = "bicubic";
    int scale = 2;
    int units = 3;
    int n_features = 32;
    int n_shallow = 64;
    int epochs = 5;
    int steps = 50;
    int batch = 8;
    int patch = 32;
    double lr = 1e-4;
    std::uint64_t seed = 0;
    bool no_augment = false;
};

std::vector<std::string> list_images(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string p = entry.path().string();
        if (io_detail::is_png(p) || io_detail::is_pnm(p)) paths.push_back(p);
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw ParameterError("no images found in " + dir);
    return paths;
}

int run_train(const TrainArgs& a) {
    std::vector<PatchPair> dataset;
    for (const auto& path : list_images(a.data_dir)) {
        ImagePlane hr = load_image_gray(path);
        // Trim so both sides divide the scale.
        const int h = hr.height() - hr.height() % a.scale;
        const int w = hr.width() - hr.width() % a.scale;
        ImagePlane trimmed(h, w);
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) trimmed.at(i, j) = hr.at(i, j);
        if (a.mode == "paired") {
            const std::string lr_path =
                (std::filesystem::path(a.lr_dir) / std::filesystem::path(path).filename()).string();
            dataset.push_back(PatchPair{load_image_gray(lr_path), std::move(trimmed)});
        } else {
            dataset.push_back(make_bicubic_pair(trimmed, a.scale));
        }
    }

    ErbpnModel model = make_erbpn_model(a.scale, a.units, a.n_features, a.n_shallow, a.seed);
    TrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.steps_per_epoch = a.steps;
    cfg.batch_size = a.batch;
    cfg.patch_size = a.patch;
    cfg.learning_rate = a.lr;
    cfg.augment = !a.no_augment;
    cfg.seed = a.seed;
    cfg.checkpoint_prefix = a.checkpoint_prefix;
    cfg.loss_csv_path = a.loss_csv;
    const TrainReport report = train(model, dataset, cfg);
    save_model(a.output, model);
    std::cout << "trained " << a.epochs << " epochs; final epoch mean loss "
              << report.epoch_mean_losses.back() << "; model -> " << a.output << "\n";
    return 0;
}

struct CascadeArgs {
    std::string seq_dir, model_path, config_path, output;
    std::string order = "mfsf";
    int stage1 = 2, stage2 = 2;
};

int run_cascade(const CascadeArgs& a) {
    const FrameSequence seq = load_sequence(a.seq_dir);
    const ErbpnModel model = load_model(a.model_path);
    CascadePlan plan;
    plan.order = a.order == "sfmf" ? CascadeOrder::Sfmf : CascadeOrder::Mfsf;
    plan.stage1_scale = a.stage1;
    plan.stage2_scale = a.stage2;
    plan.lorig_cfg = lorig_config_from_path(a.config_path);
    plan.model = &model;
    CascadeStats stats;
    const ImagePlane out = plan.order == CascadeOrder::Mfsf ? mfsf_sr(seq, plan, &stats)
                                                            : sfmf_sr(seq, plan, &stats);
    save_image_gray(a.output, out);
    std::cout << "wrote " << a.output << " (" << out.height() << "x" << out.width() << "), "
              << stats.network_inferences << " network inference(s), " << stats.reconstructions
              << " reconstruction(s)\n";
    return 0;
}

struct EvaluateArgs {
    std::string reference, test, out_csv;
    bool luminance = false;
};

int run_evaluate(const EvaluateArgs& a) {
    ImagePlane ref, test;
    if (a.luminance) {
        ref = rgb_to_ycbcr(load_image_rgb(a.reference)).y;
        test = rgb_to_ycbcr(load_image_rgb(a.test)).y;
    } else {
        ref = load_image_gray(a.reference);
        test = load_image_gray(a.test);
    }
    const double p = psnr(ref, test);
    const double s = ssim(ref, test);
    std::ostringstream row;
    row.precision(17);
    row << "test,psnr_db,ssim\n" << a.test << "," << p << "," << s << "\n";
    std::cout << row.str();
    if (!a.out_csv.empty()) {
        std::ofstream out(a.out_csv, std::ios::binary);
        if (!out) throw IoError("cannot write " + a.out_csv);
        out << row.str();
    }
    return 0;
}

struct BenchArgs {
    std::string suite_path, output;
    int threads = 1;
    std::int64_t seed_override = -1;
};

int run_bench(const BenchArgs& a) {
    const KeyValueConfig suite = KeyValueConfig::from_file(a.suite_path);
    const std::filesystem::path base = std::filesystem::path(a.suite_path).parent_path();

    auto resolve = [&](const std::string& p) {
        return std::filesystem::path(p).is_absolute() ? p : (base / p).string();
    };

    std::vector<BenchmarkImage> images;
    for (const auto& path : suite.get_list("images")) {
        BenchmarkImage img;
        img.id = std::filesystem::path(path).stem().string();
        const RgbImage rgb = load_image_rgb(resolve(path));
        img.hr = rgb_to_ycbcr(rgb).y;  // benchmark scores luminance
        images.push_back(std::move(img));
    }

    BenchmarkProtocol protocol;
    protocol.scale = static_cast<int>(suite.get_int("scale", 4));
    protocol.frame_count = static_cast<int>(suite.get_int("frames", 16));
    protocol.blur_sigma = suite.get_double("blur_sigma", 1.5);
    protocol.blur_radius = static_cast<int>(suite.get_int("blur_radius", 4));
    protocol.seed = static_cast<std::uint64_t>(suite.get_int("seed", 0));
    if (a.seed_override >= 0) protocol.seed = static_cast<std::uint64_t>(a.seed_override);
    protocol.shift_mode =
        suite.get_string("shift_mode", "grid") == "random" ? ShiftMode::Random : ShiftMode::Grid;
    protocol.registration = suite.get_string("registration", "ground_truth") == "estimate"
                                ? RegistrationMode::Estimate
                                : RegistrationMode::GroundTruth;
    protocol.threads = a.threads;
    if (suite.has("noise_variances")) {
        protocol.noise_variances.clear();
        for (const auto& v : suite.get_list("noise_variances"))
            protocol.noise_variances.push_back(std::stod(v));
    }
    if (suite.has("lorig_config"))
        protocol.lorig_cfg = lorig_config_from_path(resolve(suite.get_string("lorig_config")));
    else
        protocol.lorig_cfg = LorigConfig::from_config(suite);

    ErbpnModel cascade_model, direct_model;
    if (suite.has("cascade_model")) {
        cascade_model = load_model(resolve(suite.get_string("cascade_model")));
        protocol.cascade_model = &cascade_model;
    }
    if (suite.has("direct_model")) {
        direct_model = load_model(resolve(suite.get_string("direct_model")));
        protocol.direct_model = &direct_model;
    }

    const MetricsReport report = benchmark(images, suite.get_list("methods"), protocol);
    report.save(a.output);
    std::cout << "wrote " << report.rows.size() << " rows to " << a.output << "\n";
    return 0;
}

struct GridsearchArgs {
    std::string hr_path, config_path, output;
    int scale = 2;
    int frames = 16;
    double sigma = 1.5;
    int radius = 4;
    double noise = 0.0;
    std::uint64_t seed = 0;
    double lo = 1e-5, hi = 1e-1;
};

int run_gridsearch(const GridsearchArgs& a) {
    const ImagePlane hr = load_image_gray(a.hr_path);
    const DegradationSpec spec = make_gaussian_spec(a.scale, a.sigma, a.radius, a.noise, a.seed);
    const FrameSequence seq = simulate_sequence(hr, spec, a.frames, ShiftMode::Grid);
    const LorigConfig base = lorig_config_from_path(a.config_path);
    const auto results = gridsearch_lambda(
        seq, base, a.scale, hr, a.lo, a.hi,
        [](const ImagePlane& ref, const ImagePlane& test) { return psnr(ref, test); });

    std::ofstream out(a.output);
    if (!out) throw IoError("cannot write " + a.output);
    out << "lambda,psnr_db\n";
    out.precision(17);
    const LambdaSearchResult* best = &results.front();
    for (const auto& r : results) {
        out << r.lambda << "," << r.psnr_db << "\n";
        if (r.psnr_db > best->psnr_db) best = &r;
    }
    std::cout << "best lambda " << best->lambda << " (" << best->psnr_db << " dB) -> " << a.output
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage multi-frame / single-frame image super-resolution toolkit"};
    app.require_subcommand(1);

    DegradeArgs dg;
    auto* degrade = app.add_subcommand("degrade", "simulate a degraded LR sequence from an HR image");
    degrade->add_option("--in", dg.input, "HR input image")->required();
    degrade->add_option("--out", dg.output, "output sequence directory")->required();
    degrade->add_option("--frames", dg.frames, "number of frames");
    degrade->add_option("--scale", dg.scale, "decimation factor");
    degrade->add_option("--sigma", dg.sigma, "Gaussian blur sigma");
    degrade->add_option("--radius", dg.radius, "Gaussian blur radius");
    degrade->add_option("--noise", dg.noise, "AWGN variance on the [0,1] scale");
    degrade->add_option("--seed", dg.seed, "RNG seed");
    degrade->add_option("--shifts", dg.shifts, "grid|random")->check(CLI::IsMember({"grid", "random"}));

    RegisterArgs rg;
    auto* reg = app.add_subcommand("register", "fill per-frame motions for a sequence");
    reg->add_option("--seq", rg.seq_dir, "sequence directory")->required();
    reg->add_option("--mode", rg.mode, "estimate|ground_truth")
        ->check(CLI::IsMember({"estimate", "ground_truth"}));
    reg->add_option("--out", rg.out_dir, "output directory (default: in place)");

    SrArgs sr;
    auto* srcmd = app.add_subcommand("sr", "single-method super-resolution");
    srcmd->add_option("--method", sr.method, "bicubic|lorig|erbpn")
        ->check(CLI::IsMember({"bicubic", "lorig", "erbpn"}))
        ->required();
    srcmd->add_option("--seq", sr.seq_dir, "sequence directory (lorig, or reference frame)");
    srcmd->add_option("--in", sr.input, "single input image (bicubic/erbpn)");
    srcmd->add_option("--model", sr.model_path, "network weights (erbpn)");
    srcmd->add_option("--config", sr.config_path, "solver config file (lorig)");
    srcmd->add_option("--scale", sr.scale, "upscaling factor");
    srcmd->add_option("--log", sr.log_path, "per-iteration diagnostics CSV (lorig)");
    srcmd->add_option("--out", sr.output, "output image")->required();

    TrainArgs tr;
    auto* traincmd = app.add_subcommand("train", "train the single-frame network");
    traincmd->add_option("--data", tr.data_dir, "directory of HR training images")->required();
    traincmd->add_option("--mode", tr.mode, "bicubic|paired")
        ->check(CLI::IsMember({"bicubic", "paired"}));
    traincmd->add_option("--lr-dir", tr.lr_dir, "LR image directory (paired mode)");
    traincmd->add_option("--out", tr.output, "output model path")->required();
    traincmd->add_option("--scale", tr.scale, "network scale (2 or 4)");
    traincmd->add_option("--units", tr.units, "projection unit count T");
    traincmd->add_option("--features", tr.n_features, "feature width n_f");
    traincmd->add_option("--shallow", tr.n_shallow, "shallow feature width n_0");
    traincmd->add_option("--epochs", tr.epochs, "training epochs");
    traincmd->add_option("--steps", tr.steps, "steps per epoch");
    traincmd->add_option("--batch", tr.batch, "mini-batch size");
    traincmd->add_option("--patch", tr.patch, "HR patch size");
    traincmd->add_option("--learning-rate", tr.lr, "initial ADAM learning rate");
    traincmd->add_option("--seed", tr.seed, "RNG seed");
    traincmd->add_flag("--no-augment", tr.no_augment, "disable rotation/flip augmentation");
    traincmd->add_option("--loss-csv", tr.loss_csv, "loss curve CSV path");
    traincmd->add_option("--checkpoint-prefix", tr.checkpoint_prefix, "per-epoch checkpoint prefix");

    CascadeArgs ca;
    auto* cascade = app.add_subcommand("cascade", "two-stage reconstruction");
    cascade->add_option("--seq", ca.seq_dir, "sequence directory")->required();
    cascade->add_option("--order", ca.order, "mfsf|sfmf")->check(CLI::IsMember({"mfsf", "sfmf"}));
    cascade->add_option("--model", ca.model_path, "network weights")->required();
    cascade->add_option("--config", ca.config_path, "solver config file");
    cascade->add_option("--stage1", ca.stage1, "stage 1 scale");
    cascade->add_option("--stage2", ca.stage2, "stage 2 scale");
    cascade->add_option("--out", ca.output, "output image")->required();

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "PSNR/SSIM of a result against ground truth");
    evaluate->add_option("--ref", ev.reference, "reference image")->required();
    evaluate->add_option("--test", ev.test, "test image")->required();
    evaluate->add_flag("--luminance", ev.luminance, "score the YCbCr luminance of color inputs");
    evaluate->add_option("--out", ev.out_csv, "also write the CSV to this path");

    BenchArgs be;
    auto* bench = app.add_subcommand("bench", "run a benchmark suite");
    bench->add_option("--suite", be.suite_path, "suite config file")->required();
    bench->add_option("--out", be.output, "report CSV path")->required();
    bench->add_option("--threads", be.threads, "worker threads (default 1)");
    bench->add_option("--seed", be.seed_override, "override the suite seed");

    GridsearchArgs gs;
    auto* gridsearch = app.add_subcommand("gridsearch-lambda", "tune lambda on a validation image");
    gridsearch->add_option("--hr", gs.hr_path, "validation HR image")->required();
    gridsearch->add_option("--out", gs.output, "results CSV path")->required();
    gridsearch->add_option("--scale", gs.scale, "decimation factor");
    gridsearch->add_option("--frames", gs.frames, "frame count");
    gridsearch->add_option("--sigma", gs.sigma, "blur sigma");
    gridsearch->add_option("--radius", gs.radius, "blur radius");
    gridsearch->add_option("--noise", gs.noise, "AWGN variance");
    gridsearch->add_option("--seed", gs.seed, "RNG seed");
    gridsearch->add_option("--config", gs.config_path, "base solver config");
    gridsearch->add_option("--lo", gs.lo, "smallest lambda");
    gridsearch->add_option("--hi", gs.hi, "largest lambda");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (degrade->parsed()) return run_degrade(dg);
        if (reg->parsed()) return run_register(rg);
        if (srcmd->parsed()) return run_sr(sr);
        if (traincmd->parsed()) return run_train(tr);
        if (cascade->parsed()) return run_cascade(ca);
        if (evaluate->parsed()) return run_evaluate(ev);
        if (bench->parsed()) return run_bench(be);
        if (gridsearch->parsed()) return run_gridsearch(gs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
