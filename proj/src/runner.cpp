#include "trap/runner.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <optional>
#include <filesystem>
#include <stdexcept>

#include "trap/advbatch.hpp"
#include "trap/checkpoint.hpp"
#include "trap/eval.hpp"
#include "trap/idx.hpp"
#include "trap/report.hpp"

namespace trap::runner {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const config::ExperimentConfig& cfg, const std::string& rel) {
    fs::path p(rel);
    return p.is_absolute() ? p : fs::path(cfg.report.dir) / p;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

void require_artifact(const fs::path& p, const std::string& producer) {
    if (!fs::exists(p))
        throw std::runtime_error("missing artifact '" + p.string() + "': run `trap " + producer +
                                 "` first");
}

uint64_t model_seed(const config::ExperimentConfig& cfg, const config::ModelConfig& m) {
    return derive_seed(cfg.seed ^ m.seed, "model:" + m.name);
}

uint64_t attack_seed(const config::ExperimentConfig& cfg) {
    return cfg.attack.seed_given ? cfg.attack.cfg.seed : derive_seed(cfg.seed, "attack");
}

zoo::Dataset load_train(const config::ExperimentConfig& cfg) {
    if (cfg.dataset.train_images.empty())
        throw std::runtime_error("config: dataset.train_images not set");
    return idx::load_idx_dataset(cfg.dataset.train_images, cfg.dataset.train_labels,
                                 cfg.dataset.classes);
}

zoo::Dataset load_test(const config::ExperimentConfig& cfg) {
    if (cfg.dataset.test_images.empty())
        throw std::runtime_error("config: dataset.test_images not set");
    return idx::load_idx_dataset(cfg.dataset.test_images, cfg.dataset.test_labels,
                                 cfg.dataset.classes);
}

zoo::Checkpoint load_model_checkpoint(const config::ExperimentConfig& cfg,
                                      const std::string& name) {
    const auto path = resolve(cfg, cfg.model(name).checkpoint);
    require_artifact(path, "train");
    return zoo::load_checkpoint(path.string());
}

void cmd_train(const config::ExperimentConfig& cfg) {
    const auto test = load_test(cfg);
    for (const auto& m : cfg.models) {
        const auto train = m.train_images.empty()
                               ? load_train(cfg)
                               : idx::load_idx_dataset(m.train_images, m.train_labels,
                                                       cfg.dataset.classes);
        const auto arch = zoo::builtin_arch(m.arch, train.images.dim(2));
        auto graph = zoo::build_model(arch, model_seed(cfg, m));
        const long count = m.train_count < 0 ? train.size() - m.train_from : m.train_count;
        const auto subset = train.slice(m.train_from, count);
        auto meta = zoo::train_model(graph, subset, test, m.epochs, m.lr, m.momentum,
                                     model_seed(cfg, m), m.batch_size);
        const auto path = resolve(cfg, m.checkpoint);
        fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
        zoo::save_checkpoint({arch, graph, meta}, path.string());
        std::printf("trained %-10s arch=%s train_acc=%.4f test_acc=%.4f -> %s\n", m.name.c_str(),
                    m.arch.c_str(), meta.train_accuracy, meta.test_accuracy, path.string().c_str());
    }
}

// The effective attack config after defaults (tap, seed) and preset
// reduction are applied.
attack::AttackConfig effective_attack(const config::ExperimentConfig& cfg,
                                      const zoo::ArchDescriptor& source_arch) {
    attack::AttackConfig ac = cfg.attack.cfg;
    if (!cfg.attack.tap_given) ac.tap = source_arch.default_tap;
    ac.seed = attack_seed(cfg);
    auto preset = attack::preset_from_name(cfg.attack.preset);
    if (!preset) throw std::runtime_error("unknown preset '" + cfg.attack.preset + "'");
    return attack::apply_preset(*preset, ac);
}

void cmd_attack(const config::ExperimentConfig& cfg, const std::string& trace_name = "trace.csv") {
    if (cfg.attack.source.empty()) throw std::runtime_error("config: attack.source not set");
    const auto ckpt = load_model_checkpoint(cfg, cfg.attack.source);
    const auto test = load_test(cfg);
    const long n = std::min<long>(cfg.attack.count, test.size());
    const auto sub = test.slice(0, n);
    const auto ac = effective_attack(cfg, ckpt.arch);

    auto [adv, trace] = attack::run_trap(ckpt.graph, sub.images, sub.labels, ac);

    adv::AdversarialBatch batch;
    batch.source_checkpoint = cfg.attack.source;
    batch.preset = cfg.attack.preset;
    batch.epsilon_255 = ac.epsilon_255;
    batch.iterations = ac.iterations;
    batch.t1 = ac.t1;
    batch.mu = ac.mu;
    batch.p = ac.p;
    batch.beta = ac.beta;
    batch.gamma = ac.gamma;
    batch.tap = ac.tap;
    batch.seed = ac.seed;
    batch.benign = sub.images;
    batch.adv = adv;
    batch.labels = sub.labels;
    fs::create_directories(cfg.report.dir);
    adv::save_adversarial_batch(batch, resolve(cfg, cfg.attack.output).string());

    report::Csv tr;
    tr.header = {"step", "phase", "mean_loss", "transform_rate"};
    for (const auto& r : trace.records)
        tr.add_row({std::to_string(r.step), r.enhancement ? "enhancement" : "baseline",
                    report::format_value(r.mean_loss), report::format_value(r.transform_rate)});
    report::write_csv(resolve(cfg, trace_name).string(), tr);
    std::printf("attack %s source=%s n=%ld eps=%d/255 T=%d t1=%d -> %s\n",
                cfg.attack.preset.c_str(), cfg.attack.source.c_str(), n, ac.epsilon_255,
                ac.iterations, ac.t1, resolve(cfg, cfg.attack.output).string().c_str());
}

report::Csv asr_header() {
    report::Csv csv;
    csv.header = {"source", "target", "preset", "epsilon_255", "T",    "t1",  "mu",
                  "p",      "beta",   "gamma",  "seed",        "asr", "asr_benign_subtracted"};
    return csv;
}

void append_asr_rows(report::Csv& csv, const config::ExperimentConfig& cfg,
                     const adv::AdversarialBatch& batch) {
    for (const auto& target : cfg.eval.targets) {
        const auto ckpt = load_model_checkpoint(cfg, target);
        const double asr =
            eval::attack_success_rate(ckpt.graph, batch.benign, batch.adv, batch.labels, false);
        const double asr_sub =
            eval::attack_success_rate(ckpt.graph, batch.benign, batch.adv, batch.labels, true);
        csv.add_row({batch.source_checkpoint, target, batch.preset,
                     std::to_string(batch.epsilon_255), std::to_string(batch.iterations),
                     std::to_string(batch.t1), report::format_value(batch.mu),
                     report::format_value(batch.p), report::format_value(batch.beta),
                     report::format_value(batch.gamma), std::to_string(batch.seed),
                     report::format_value(asr), report::format_value(asr_sub)});
    }
}

void append_destruction_rows(report::Csv& csv, const config::ExperimentConfig& cfg,
                             const adv::AdversarialBatch& batch,
                             const ComputeGraph<float>& target) {
    auto row = [&](const std::string& kind, double level, std::optional<double> rate, long count) {
        csv.add_row({batch.preset, kind, report::format_value(level),
                     rate ? report::format_value(*rate) : "NA", std::to_string(count)});
    };
    for (size_t li = 0; li < cfg.eval.noise_levels.size(); ++li) {
        const double sigma = cfg.eval.noise_levels[li];
        Rng rng(derive_seed(cfg.seed, "corrupt-noise", li));
        long count = 0;
        auto rate = eval::destruction_rate(
            target, batch.benign, batch.adv, batch.labels,
            [&](const Tensor<float>& img) { return eval::corrupt_gaussian_noise(img, sigma, rng); },
            &count);
        row("gaussian_noise", sigma, rate, count);
    }
    for (double sigma : cfg.eval.blur_levels) {
        long count = 0;
        auto rate = eval::destruction_rate(
            target, batch.benign, batch.adv, batch.labels,
            [&](const Tensor<float>& img) { return eval::corrupt_gaussian_blur(img, sigma); },
            &count);
        row("gaussian_blur", sigma, rate, count);
    }
}

std::vector<std::string> default_rfd_layers(const zoo::ArchDescriptor& arch) {
    std::vector<std::string> out;
    for (const auto& l : arch.layers)
        if (l.kind == LayerKind::Relu) out.push_back(l.id);
    return out;
}

void append_rfd_rows(report::Csv& csv, const config::ExperimentConfig& cfg,
                     const adv::AdversarialBatch& batch, const zoo::Checkpoint& source) {
    auto layers = cfg.eval.rfd_layers;
    if (layers.empty()) layers = default_rfd_layers(source.arch);
    for (const auto& layer : layers) {
        const double v =
            eval::relative_feature_difference(source.graph, layer, batch.benign, batch.adv);
        csv.add_row({layer, batch.preset, report::format_value(v)});
    }
}

void cmd_eval(const config::ExperimentConfig& cfg) {
    const auto batch_path = resolve(cfg, cfg.eval.batch);
    require_artifact(batch_path, "attack");
    const auto batch = adv::load_adversarial_batch(batch_path.string());

    auto asr = asr_header();
    append_asr_rows(asr, cfg, batch);
    report::write_csv(resolve(cfg, "asr.csv").string(), asr);

    report::Csv destruction;
    destruction.header = {"preset", "corruption", "level", "rate", "count"};
    if (!cfg.eval.targets.empty()) {
        const auto target = load_model_checkpoint(cfg, cfg.eval.targets.front());
        append_destruction_rows(destruction, cfg, batch, target.graph);
    }
    report::write_csv(resolve(cfg, "destruction.csv").string(), destruction);

    report::Csv rfd;
    rfd.header = {"layer_id", "method", "value"};
    const auto source = load_model_checkpoint(cfg, batch.source_checkpoint);
    append_rfd_rows(rfd, cfg, batch, source);
    report::write_csv(resolve(cfg, "rfd.csv").string(), rfd);
    std::printf("eval %s: %zu asr rows, %zu destruction rows, %zu rfd rows\n",
                batch.preset.c_str(), asr.rows.size(), destruction.rows.size(), rfd.rows.size());
}

void cmd_sweep(const config::ExperimentConfig& cfg) {
    if (cfg.sweep.axis.empty()) throw std::runtime_error("config: sweep.axis not set");
    if (cfg.sweep.values.empty()) throw std::runtime_error("config: sweep.values not set");
    auto asr = asr_header();
    report::Csv rfd;
    rfd.header = {"layer_id", "method", "value"};

    for (const auto& value : cfg.sweep.values) {
        config::ExperimentConfig c = cfg;
        auto& a = c.attack;
        if (cfg.sweep.axis == "layer") {
            a.cfg.tap = value;
            a.tap_given = true;
        } else if (cfg.sweep.axis == "T") {
            a.cfg.iterations = std::stoi(value);
            a.cfg.t1 = std::min(a.cfg.t1, a.cfg.iterations);
        } else if (cfg.sweep.axis == "preset") {
            if (!attack::preset_from_name(value))
                throw std::runtime_error("sweep: unknown preset '" + value + "'");
            a.preset = value;
        } else if (cfg.sweep.axis == "beta") {
            a.cfg.beta = std::stof(value);
        } else if (cfg.sweep.axis == "p") {
            a.cfg.p = std::stof(value);
        }
        const std::string tag = sanitize(cfg.sweep.axis) + "_" + sanitize(value);
        a.output = "adv_" + tag + ".bin";
        cmd_attack(c, "trace_" + tag + ".csv");

        const auto batch = adv::load_adversarial_batch(resolve(c, a.output).string());
        append_asr_rows(asr, c, batch);
        if (cfg.sweep.axis == "layer" || cfg.sweep.axis == "preset") {
            const auto source = load_model_checkpoint(c, batch.source_checkpoint);
            auto layers = c.eval.rfd_layers;
            if (cfg.sweep.axis == "layer") layers = {batch.tap};
            config::ExperimentConfig cl = c;
            cl.eval.rfd_layers = layers;
            append_rfd_rows(rfd, cl, batch, source);
        }
    }
    report::write_csv(resolve(cfg, "asr.csv").string(), asr);
    if (!rfd.rows.empty()) report::write_csv(resolve(cfg, "rfd.csv").string(), rfd);
    std::printf("sweep %s over %zu values: %zu asr rows\n", cfg.sweep.axis.c_str(),
                cfg.sweep.values.size(), asr.rows.size());
}

void cmd_report(const config::ExperimentConfig& cfg) {
    fs::create_directories(cfg.report.dir);
    int plots = 0;
    if (cfg.report.emit_plots) plots = report::emit_plots(cfg.report.dir);

    report::Manifest manifest;
    manifest.set_config_hash(fnv1a(cfg.source_text));
    manifest.set_master_seed(cfg.seed);
    for (const auto& m : cfg.models) manifest.add_seed("model." + m.name, model_seed(cfg, m));
    manifest.add_seed("attack", attack_seed(cfg));
    for (size_t li = 0; li < cfg.eval.noise_levels.size(); ++li)
        manifest.add_seed("corrupt-noise." + std::to_string(li),
                          derive_seed(cfg.seed, "corrupt-noise", li));
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(cfg.report.dir))
        if (e.is_regular_file() && e.path().filename() != "manifest.txt")
            names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const auto& n : names) manifest.add_file(cfg.report.dir, n);
    manifest.write((fs::path(cfg.report.dir) / "manifest.txt").string());
    std::printf("report: %zu files listed, %d plots\n", names.size(), plots);
}

}  // namespace

void run_command(const config::ExperimentConfig& cfg, const std::string& command) {
    fs::create_directories(cfg.report.dir);
    if (command == "train")
        cmd_train(cfg);
    else if (command == "attack")
        cmd_attack(cfg);
    else if (command == "eval")
        cmd_eval(cfg);
    else if (command == "sweep")
        cmd_sweep(cfg);
    else if (command == "report")
        cmd_report(cfg);
    else if (command == "all") {
        cmd_train(cfg);
        cmd_attack(cfg);
        cmd_eval(cfg);
        cmd_report(cfg);
    } else
        throw std::runtime_error("unknown command '" + command + "'");
}

}  // namespace trap::runner
