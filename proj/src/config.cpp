#include "trap/config.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "trap/io.hpp"
#include "trap/zoo.hpp"

namespace trap::config {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) out.push_back(trim(part));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

[[noreturn]] void fail(const std::string& origin, const std::string& key, const std::string& why) {
    throw std::runtime_error(origin + ": key '" + key + "': " + why);
}

long parse_long(const std::string& origin, const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        long r = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return r;
    } catch (...) {
        fail(origin, key, "'" + v + "' is not an integer");
    }
}

double parse_double(const std::string& origin, const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        double r = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return r;
    } catch (...) {
        fail(origin, key, "'" + v + "' is not a number");
    }
}

bool parse_bool(const std::string& origin, const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    fail(origin, key, "'" + v + "' is not a boolean");
}

affine::Interval parse_interval(const std::string& origin, const std::string& key,
                                const std::string& v) {
    auto parts = split(v, ',');
    if (parts.size() != 2) fail(origin, key, "expected 'lo,hi'");
    affine::Interval iv{parse_double(origin, key, parts[0]), parse_double(origin, key, parts[1])};
    if (!iv.valid()) fail(origin, key, "lo > hi");
    return iv;
}

std::vector<double> parse_doubles(const std::string& origin, const std::string& key,
                                  const std::string& v) {
    std::vector<double> out;
    for (const auto& p : split(v, ',')) out.push_back(parse_double(origin, key, p));
    return out;
}

}  // namespace

std::map<std::string, std::string> parse_kv(const std::string& text, const std::string& origin) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                                     key + "'");
    }
    return kv;
}

const ModelConfig& ExperimentConfig::model(const std::string& name) const {
    for (const auto& m : models)
        if (m.name == name) return m;
    throw std::runtime_error("config: no model named '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    auto kv = parse_kv(text, origin);
    ExperimentConfig cfg;
    cfg.source_text = text;

    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("seed")) cfg.seed = static_cast<uint64_t>(parse_long(origin, "seed", *v));

    if (auto v = take("dataset.train_images")) cfg.dataset.train_images = *v;
    if (auto v = take("dataset.train_labels")) cfg.dataset.train_labels = *v;
    if (auto v = take("dataset.test_images")) cfg.dataset.test_images = *v;
    if (auto v = take("dataset.test_labels")) cfg.dataset.test_labels = *v;
    if (auto v = take("dataset.classes"))
        cfg.dataset.classes = static_cast<int>(parse_long(origin, "dataset.classes", *v));

    // Model sections are discovered from their key prefixes.
    std::vector<std::string> model_names;
    for (const auto& [key, value] : kv) {
        (void)value;
        if (key.rfind("model.", 0) != 0) continue;
        const size_t dot = key.find('.', 6);
        if (dot == std::string::npos) fail(origin, key, "expected model.<name>.<field>");
        const std::string name = key.substr(6, dot - 6);
        if (std::find(model_names.begin(), model_names.end(), name) == model_names.end())
            model_names.push_back(name);
    }
    for (const auto& name : model_names) {
        ModelConfig m;
        m.name = name;
        m.checkpoint = name + ".ckpt";
        const std::string pre = "model." + name + ".";
        if (auto v = take(pre + "arch")) m.arch = *v;
        if (auto v = take(pre + "seed"))
            m.seed = static_cast<uint64_t>(parse_long(origin, pre + "seed", *v));
        if (auto v = take(pre + "epochs"))
            m.epochs = static_cast<int>(parse_long(origin, pre + "epochs", *v));
        if (auto v = take(pre + "lr")) m.lr = static_cast<float>(parse_double(origin, pre + "lr", *v));
        if (auto v = take(pre + "momentum"))
            m.momentum = static_cast<float>(parse_double(origin, pre + "momentum", *v));
        if (auto v = take(pre + "batch_size"))
            m.batch_size = static_cast<int>(parse_long(origin, pre + "batch_size", *v));
        if (auto v = take(pre + "checkpoint")) m.checkpoint = *v;
        if (auto v = take(pre + "train_from"))
            m.train_from = parse_long(origin, pre + "train_from", *v);
        if (auto v = take(pre + "train_count"))
            m.train_count = parse_long(origin, pre + "train_count", *v);
        if (auto v = take(pre + "train_images")) m.train_images = *v;
        if (auto v = take(pre + "train_labels")) m.train_labels = *v;
        if (m.arch.empty()) fail(origin, pre + "arch", "missing (required per model)");
        cfg.models.push_back(std::move(m));
    }

    auto& a = cfg.attack;
    if (auto v = take("attack.preset")) {
        if (!attack::preset_from_name(*v)) fail(origin, "attack.preset", "unknown preset '" + *v + "'");
        a.preset = *v;
    }
    if (auto v = take("attack.source")) a.source = *v;
    if (auto v = take("attack.count"))
        a.count = static_cast<int>(parse_long(origin, "attack.count", *v));
    if (auto v = take("attack.output")) a.output = *v;
    if (auto v = take("attack.epsilon_255"))
        a.cfg.epsilon_255 = static_cast<int>(parse_long(origin, "attack.epsilon_255", *v));
    if (auto v = take("attack.iterations"))
        a.cfg.iterations = static_cast<int>(parse_long(origin, "attack.iterations", *v));
    if (auto v = take("attack.t1")) a.cfg.t1 = static_cast<int>(parse_long(origin, "attack.t1", *v));
    if (auto v = take("attack.mu")) a.cfg.mu = static_cast<float>(parse_double(origin, "attack.mu", *v));
    if (auto v = take("attack.p")) a.cfg.p = static_cast<float>(parse_double(origin, "attack.p", *v));
    if (auto v = take("attack.beta"))
        a.cfg.beta = static_cast<float>(parse_double(origin, "attack.beta", *v));
    if (auto v = take("attack.gamma"))
        a.cfg.gamma = static_cast<float>(parse_double(origin, "attack.gamma", *v));
    if (auto v = take("attack.tap")) {
        a.cfg.tap = *v;
        a.tap_given = true;
    }
    if (auto v = take("attack.seed")) {
        a.cfg.seed = static_cast<uint64_t>(parse_long(origin, "attack.seed", *v));
        a.seed_given = true;
    }
    if (auto v = take("attack.transform_enabled"))
        a.cfg.transform_enabled = parse_bool(origin, "attack.transform_enabled", *v);
    if (auto v = take("attack.sample_per_item"))
        a.cfg.sample_per_item = parse_bool(origin, "attack.sample_per_item", *v);
    if (auto v = take("attack.order")) {
        if (*v == "shear_first")
            a.cfg.order = affine::ComposeOrder::ShearFirst;
        else if (*v == "translate_first")
            a.cfg.order = affine::ComposeOrder::TranslateFirst;
        else
            fail(origin, "attack.order", "expected shear_first or translate_first");
    }
    if (auto v = take("attack.range.translate"))
        a.cfg.ranges.translate = parse_interval(origin, "attack.range.translate", *v);
    if (auto v = take("attack.range.rotate"))
        a.cfg.ranges.rotate_deg = parse_interval(origin, "attack.range.rotate", *v);
    if (auto v = take("attack.range.scale"))
        a.cfg.ranges.scale = parse_interval(origin, "attack.range.scale", *v);
    if (auto v = take("attack.range.shear"))
        a.cfg.ranges.shear = parse_interval(origin, "attack.range.shear", *v);

    if (auto v = take("eval.targets")) {
        cfg.eval.targets.clear();
        for (const auto& t : split(*v, ','))
            if (!t.empty()) cfg.eval.targets.push_back(t);
    }
    if (auto v = take("eval.subtract_benign"))
        cfg.eval.subtract_benign = parse_bool(origin, "eval.subtract_benign", *v);
    if (auto v = take("eval.noise_levels"))
        cfg.eval.noise_levels = parse_doubles(origin, "eval.noise_levels", *v);
    if (auto v = take("eval.blur_levels"))
        cfg.eval.blur_levels = parse_doubles(origin, "eval.blur_levels", *v);
    if (auto v = take("eval.rfd_layers")) {
        cfg.eval.rfd_layers.clear();
        for (const auto& t : split(*v, ','))
            if (!t.empty()) cfg.eval.rfd_layers.push_back(t);
    }
    if (auto v = take("eval.batch")) cfg.eval.batch = *v;

    if (auto v = take("sweep.axis")) {
        static const std::vector<std::string> axes = {"layer", "T", "preset", "beta", "p"};
        if (std::find(axes.begin(), axes.end(), *v) == axes.end())
            fail(origin, "sweep.axis", "unknown axis '" + *v + "'");
        cfg.sweep.axis = *v;
    }
    if (auto v = take("sweep.values")) {
        for (const auto& t : split(*v, ','))
            if (!t.empty()) cfg.sweep.values.push_back(t);
    }

    if (auto v = take("report.dir")) cfg.report.dir = *v;
    if (auto v = take("report.emit_plots"))
        cfg.report.emit_plots = parse_bool(origin, "report.emit_plots", *v);

    if (!kv.empty()) fail(origin, kv.begin()->first, "unknown key");

    a.cfg.validate();
    for (const auto& m : cfg.models) {
        zoo::builtin_arch(m.arch);  // throws on unknown names
        if (m.epochs < 0 || m.batch_size <= 0 || m.train_from < 0)
            throw std::runtime_error(origin + ": model '" + m.name + "': invalid training numbers");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    auto buf = io::read_file(path);
    return parse_config(std::string(buf.begin(), buf.end()), path);
}

}  // namespace trap::config
