#include "tracer/geometry/report.hpp"

namespace tracer::geometry {

nlohmann::json to_json(const TraceEstimate& t) {
    return {{"estimate", t.estimate}, {"std_error", t.std_error}, {"probes", t.probes}};
}

nlohmann::json to_json(const LaplaceSummary& s) {
    return {{"loss_at_mode", s.loss_at_mode},
            {"log_det_hessian", s.log_det_hessian},
            {"dim", s.dim},
            {"log_Z", s.log_evidence}};
}

nlohmann::json to_json(const FlatnessProfile& profile) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : profile.rows) {
        rows.push_back({{"sigma", r.sigma},
                        {"mean_increase", r.mean_increase},
                        {"std_error", r.std_error},
                        {"second_order", r.second_order}});
    }
    return {{"trace", to_json(profile.trace)}, {"rows", rows}};
}

nlohmann::json to_json(const MixtureWeights& m) {
    return nlohmann::json(std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size()));
}

nlohmann::json to_json(const DiagnosticsRecord& r) {
    nlohmann::json j{{"mode_id", r.mode_id},
                     {"loss", r.loss},
                     {"gradient_norm", r.gradient_norm},
                     {"hessian_trace", to_json(r.trace)},
                     {"fisher_trace_gm", r.fisher_trace_gm},
                     {"fisher_trace_per_example", r.fisher_trace_per_example},
                     {"profile", to_json(r.profile)}};
    j["log_Z"] = r.laplace ? nlohmann::json(r.laplace->log_evidence) : nlohmann::json(nullptr);
    j["laplace"] = r.laplace ? to_json(*r.laplace) : nlohmann::json(nullptr);
    if (r.laplace_error) j["laplace_error"] = *r.laplace_error;
    return j;
}

}  // namespace tracer::geometry
