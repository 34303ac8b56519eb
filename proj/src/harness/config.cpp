#include "tracer/harness/config.hpp"

#include <fstream>
#include <set>

namespace tracer::harness {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw TracerError("config: '" + where + "' must be an object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw TracerError("config: unknown key '" + key + "' in " + where);
    }
}

const json& need(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw TracerError("config: missing required field '" + where + "." + key + "'");
    return j.at(key);
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
    try {
        return need(j, key, where).get<T>();
    } catch (const json::exception& e) {
        throw TracerError("config: bad value for '" + where + "." + key + "': " + e.what());
    }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
    return j.contains(key) ? get<T>(j, key, where) : fallback;
}

DatasetSpec parse_dataset(const json& j) {
    check_keys(j, {"name", "n_train", "n_val", "n_test", "noise", "flip_fraction", "classes", "seed", "images", "labels"},
               "dataset");
    DatasetSpec d;
    d.name = get<std::string>(j, "name", "dataset");
    d.n_train = get<std::size_t>(j, "n_train", "dataset");
    d.n_val = get_or<std::size_t>(j, "n_val", 0, "dataset");
    d.n_test = get<std::size_t>(j, "n_test", "dataset");
    d.noise = get_or<double>(j, "noise", 0.0, "dataset");
    d.flip_fraction = get_or<double>(j, "flip_fraction", 0.0, "dataset");
    d.classes = get_or<int>(j, "classes", d.name == "idx_file" ? 10 : 2, "dataset");
    d.seed = get<std::uint64_t>(j, "seed", "dataset");
    d.images = get_or<std::string>(j, "images", "", "dataset");
    d.labels = get_or<std::string>(j, "labels", "", "dataset");
    return d;
}

OptimizerSpec parse_optimizer(const json& j) {
    check_keys(j, {"name", "lr", "schedule", "momentum", "beta1", "beta2", "eps", "rho", "beta", "delta", "fd_step",
                   "rho_sam", "alias_second_moment"},
               "optimizer");
    OptimizerSpec o;
    o.name = get<std::string>(j, "name", "optimizer");
    o.schedule.base = get<double>(j, "lr", "optimizer");
    o.schedule.kind = parse_schedule_kind(get<std::string>(j, "schedule", "optimizer"));
    const bool tracer = is_tracer_optimizer(o.name);
    if (o.name == "momentum") {
        o.momentum = get<double>(j, "momentum", "optimizer");
    } else {
        o.momentum = get_or<double>(j, "momentum", 0.0, "optimizer");
    }
    o.adam.beta1 = get_or<double>(j, "beta1", o.adam.beta1, "optimizer");
    o.adam.beta2 = get_or<double>(j, "beta2", o.adam.beta2, "optimizer");
    o.adam.eps = get_or<double>(j, "eps", o.adam.eps, "optimizer");
    if (tracer) {
        o.rho = get<double>(j, "rho", "optimizer");
        o.beta = get<double>(j, "beta", "optimizer");
        const auto& delta = need(j, "delta", "optimizer");
        if (delta.is_string()) {
            if (delta.get<std::string>() != "auto") throw TracerError("config: optimizer.delta must be a number or \"auto\"");
        } else {
            o.delta = get<double>(j, "delta", "optimizer");
        }
    } else {
        o.rho = get_or<double>(j, "rho", 0.0, "optimizer");
        o.beta = get_or<double>(j, "beta", 0.999, "optimizer");
        if (j.contains("delta") && !j.at("delta").is_string()) o.delta = get<double>(j, "delta", "optimizer");
    }
    o.fd_step = get_or<double>(j, "fd_step", 0.0, "optimizer");
    if (o.name == "sam") {
        o.rho_sam = get<double>(j, "rho_sam", "optimizer");
    } else {
        o.rho_sam = get_or<double>(j, "rho_sam", o.rho_sam, "optimizer");
    }
    o.alias_second_moment = get_or<bool>(j, "alias_second_moment", false, "optimizer");
    return o;
}

}  // namespace

ModelSpec parse_model_spec(const json& j) {
    check_keys(j, {"kind", "hidden", "activation", "diag", "b", "c"}, "model");
    ModelSpec m;
    m.kind = get<std::string>(j, "kind", "model");
    if (m.kind == "mlp") {
        m.hidden = get<std::vector<int>>(j, "hidden", "model");
        const auto act = get<std::string>(j, "activation", "model");
        if (act == "relu") {
            m.activation = Activation::Relu;
        } else if (act == "tanh") {
            m.activation = Activation::Tanh;
        } else {
            throw TracerError("config: unknown activation '" + act + "'");
        }
    } else if (m.kind == "quadratic") {
        m.diag = get<std::vector<double>>(j, "diag", "model");
        m.b = get<std::vector<double>>(j, "b", "model");
        m.c = get_or<double>(j, "c", 0.0, "model");
    } else if (m.kind != "logistic") {
        throw TracerError("config: unknown model kind '" + m.kind + "'");
    }
    return m;
}

void ExperimentConfig::validate() const {
    static const std::set<std::string> datasets = {"two_moons", "gaussian_blobs", "xor", "idx_file"};
    require(datasets.count(dataset.name) == 1, "config: unknown dataset '" + dataset.name + "'");
    require(dataset.n_train >= 1, "config: dataset.n_train must be >= 1");
    require(dataset.flip_fraction >= 0.0 && dataset.flip_fraction < 1.0, "config: flip_fraction must lie in [0, 1)");
    require(dataset.noise >= 0.0, "config: dataset.noise must be >= 0");
    require(dataset.classes >= 2, "config: dataset.classes must be >= 2");
    require(batch_size >= 1, "config: batch_size must be >= 1");
    require(epochs >= 1, "config: epochs must be >= 1");
    require(!seeds.empty(), "config: at least one replicate seed is required");
    require(!output_dir.empty(), "config: output_dir is required");
    if (model.kind == "quadratic") {
        require(!model.diag.empty() && model.diag.size() == model.b.size(), "config: quadratic diag and b must match");
    } else {
        require(dataset.n_test >= 1, "config: dataset.n_test must be >= 1");
    }
    make_optimizer(optimizer);  // validates hyperparameters
}

ExperimentConfig parse_config(const json& j) {
    check_keys(j, {"schema_version", "dataset", "model", "optimizer", "epochs", "batch_size", "output_dir", "seeds"},
               "config");
    const int version = get<int>(j, "schema_version", "config");
    if (version != kSchemaVersion) throw TracerError("config: unsupported schema_version " + std::to_string(version));
    ExperimentConfig cfg;
    cfg.dataset = parse_dataset(need(j, "dataset", "config"));
    cfg.model = parse_model_spec(need(j, "model", "config"));
    cfg.optimizer = parse_optimizer(need(j, "optimizer", "config"));
    cfg.epochs = get<std::size_t>(j, "epochs", "config");
    cfg.batch_size = get<std::size_t>(j, "batch_size", "config");
    cfg.output_dir = get<std::string>(j, "output_dir", "config");
    cfg.seeds = get<std::vector<std::uint64_t>>(j, "seeds", "config");
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TracerError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw TracerError("config " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

json to_json(const ModelSpec& m) {
    json j{{"kind", m.kind}};
    if (m.kind == "mlp") {
        j["hidden"] = m.hidden;
        j["activation"] = m.activation == Activation::Relu ? "relu" : "tanh";
    } else if (m.kind == "quadratic") {
        j["diag"] = m.diag;
        j["b"] = m.b;
        j["c"] = m.c;
    }
    return j;
}

json to_json(const ExperimentConfig& cfg) {
    const auto& d = cfg.dataset;
    json dataset{{"name", d.name},   {"n_train", d.n_train}, {"n_val", d.n_val},     {"n_test", d.n_test},
                 {"noise", d.noise}, {"flip_fraction", d.flip_fraction}, {"classes", d.classes}, {"seed", d.seed}};
    if (d.name == "idx_file") {
        dataset["images"] = d.images;
        dataset["labels"] = d.labels;
    }
    const auto& o = cfg.optimizer;
    json opt{{"name", o.name},
             {"lr", o.schedule.base},
             {"schedule", to_string(o.schedule.kind)},
             {"momentum", o.momentum},
             {"beta1", o.adam.beta1},
             {"beta2", o.adam.beta2},
             {"eps", o.adam.eps},
             {"rho", o.rho},
             {"beta", o.beta},
             {"fd_step", o.fd_step},
             {"rho_sam", o.rho_sam},
             {"alias_second_moment", o.alias_second_moment}};
    opt["delta"] = o.delta ? json(*o.delta) : json("auto");
    return {{"schema_version", kSchemaVersion},
            {"dataset", dataset},
            {"model", to_json(cfg.model)},
            {"optimizer", opt},
            {"epochs", cfg.epochs},
            {"batch_size", cfg.batch_size},
            {"output_dir", cfg.output_dir},
            {"seeds", cfg.seeds}};
}

bool is_sweep_parameter(const std::string& name) {
    return name == "rho" || name == "rho_sam" || name == "lr" || name == "beta" || name == "delta";
}

ExperimentConfig with_parameter(ExperimentConfig cfg, const std::string& name, double value) {
    auto& o = cfg.optimizer;
    if (name == "rho") {
        o.rho = value;
    } else if (name == "rho_sam") {
        o.rho_sam = value;
    } else if (name == "lr") {
        o.schedule.base = value;
    } else if (name == "beta") {
        o.beta = value;
    } else if (name == "delta") {
        o.delta = value;
    } else {
        throw TracerError("sweep: unknown parameter '" + name + "' (expected rho, rho_sam, lr, beta or delta)");
    }
    cfg.validate();
    return cfg;
}

}  // namespace tracer::harness
