#include "atrp/atrp.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "atrp/error.hpp"
#include "atrp/riskmetrics.hpp"
#include "atrp/scenario.hpp"

struct atrp_config {
    atrp::ScenarioConfig value;
};
struct atrp_claims {
    atrp::IngestResult value;
};
struct atrp_bundle {
    atrp::ModelBundle value;
};
struct atrp_report {
    atrp::ReserveReport value;
};

namespace {

thread_local std::string last_error;

template <class F>
atrp_status guarded(F&& f) noexcept {
    try {
        f();
        last_error.clear();
        return ATRP_OK;
    } catch (const atrp::Error& e) {
        last_error = e.what();
        return static_cast<atrp_status>(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
    } catch (const std::exception& e) {
        last_error = e.what();
    } catch (...) {
        last_error = "unknown failure";
    }
    return ATRP_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
    atrp::require(p != nullptr, atrp::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* atrp_version(void) { return "1.0.0"; }

const char* atrp_status_name(atrp_status status) {
    if (status == ATRP_OK) return "ok";
    return atrp::error_code_name(static_cast<atrp::ErrorCode>(status));
}

const char* atrp_last_error(void) { return last_error.c_str(); }

void atrp_string_free(char* s) { std::free(s); }

atrp_status atrp_config_load(const char* path, atrp_config** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new atrp_config{atrp::load_config(path)};
    });
}

atrp_status atrp_config_parse(const char* json_text, atrp_config** out) {
    return guarded([&] {
        need(json_text, "json_text");
        need(out, "out");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(json_text);
        } catch (const nlohmann::json::exception& e) {
            atrp::fail(atrp::ErrorCode::Parse, std::string("config: ") + e.what());
        }
        *out = new atrp_config{atrp::parse_config(j)};
    });
}

atrp_status atrp_config_set_seed(atrp_config* cfg, uint64_t seed) {
    return guarded([&] {
        need(cfg, "cfg");
        cfg->value.seed = seed;
    });
}

atrp_status atrp_config_set_sims(atrp_config* cfg, size_t sims) {
    return guarded([&] {
        need(cfg, "cfg");
        atrp::require(sims >= 1, atrp::ErrorCode::InvalidArgument, "sims must be at least 1");
        cfg->value.sims = sims;
    });
}

atrp_status atrp_config_set_workers(atrp_config* cfg, unsigned workers) {
    return guarded([&] {
        need(cfg, "cfg");
        cfg->value.workers = workers;
    });
}

atrp_status atrp_config_to_json(const atrp_config* cfg, char** out) {
    return guarded([&] {
        need(cfg, "cfg");
        need(out, "out");
        *out = dup(cfg->value.to_json().dump(2));
    });
}

void atrp_config_free(atrp_config* cfg) { delete cfg; }

atrp_status atrp_claims_load(const char* path, const atrp_config* cfg, atrp_claims** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        const atrp::IngestOptions opts = cfg ? cfg->value.ingest : atrp::IngestOptions{};
        *out = new atrp_claims{atrp::ingest_claims(path, opts)};
    });
}

size_t atrp_claims_count(const atrp_claims* claims) { return claims ? claims->value.claims.size() : 0; }

size_t atrp_claims_rejected_count(const atrp_claims* claims) { return claims ? claims->value.rejects.size() : 0; }

atrp_status atrp_claims_rejected_row(const atrp_claims* claims, size_t k, size_t* line, const char** reason) {
    return guarded([&] {
        need(claims, "claims");
        atrp::require(k < claims->value.rejects.size(), atrp::ErrorCode::InvalidArgument, "reject index out of range");
        if (line) *line = claims->value.rejects[k].line;
        if (reason) *reason = claims->value.rejects[k].reason.c_str();
    });
}

void atrp_claims_free(atrp_claims* claims) { delete claims; }

atrp_status atrp_calibrate(const atrp_claims* claims, const atrp_config* cfg, atrp_bundle** out) {
    return guarded([&] {
        need(claims, "claims");
        need(cfg, "cfg");
        need(out, "out");
        *out = new atrp_bundle{atrp::calibrate_bundle(claims->value.claims, cfg->value)};
    });
}

atrp_status atrp_bundle_load(const char* path, atrp_bundle** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new atrp_bundle{atrp::load_bundle(path)};
    });
}

atrp_status atrp_bundle_save(const atrp_bundle* bundle, const char* path) {
    return guarded([&] {
        need(bundle, "bundle");
        need(path, "path");
        atrp::save_bundle(bundle->value, path);
    });
}

void atrp_bundle_free(atrp_bundle* bundle) { delete bundle; }

atrp_status atrp_run(const atrp_config* cfg, const atrp_claims* claims, const atrp_bundle* bundle, unsigned tasks,
                     atrp_report** out) {
    return guarded([&] {
        need(cfg, "cfg");
        need(out, "out");
        atrp::ScenarioInputs in;
        in.claims = claims ? &claims->value.claims : nullptr;
        in.bundle = bundle ? &bundle->value : nullptr;
        *out = new atrp_report{atrp::run_scenario(cfg->value, in, tasks)};
    });
}

atrp_status atrp_report_load(const char* path, atrp_report** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new atrp_report{atrp::load_report(path)};
    });
}

atrp_status atrp_report_write(const atrp_report* report, const char* format, const char* path) {
    return guarded([&] {
        need(report, "report");
        need(format, "format");
        need(path, "path");
        atrp::emit_report(report->value, atrp::parse_report_format(format), path);
    });
}

atrp_status atrp_report_to_json(const atrp_report* report, char** out) {
    return guarded([&] {
        need(report, "report");
        need(out, "out");
        *out = dup(report->value.to_json().dump(2));
    });
}

atrp_status atrp_report_to_text(const atrp_report* report, char** out) {
    return guarded([&] {
        need(report, "report");
        need(out, "out");
        *out = dup(atrp::render_text(report->value));
    });
}

void atrp_report_free(atrp_report* report) { delete report; }

atrp_status atrp_risk_measures(const double* sample, size_t n, const double* levels, size_t n_levels, double* var,
                               double* tvar, double* mean, double* sd) {
    return guarded([&] {
        need(sample, "sample");
        atrp::require(n_levels == 0 || (levels && var && tvar), atrp::ErrorCode::InvalidArgument,
                      "levels and outputs are required when n_levels > 0");
        const auto s = atrp::risk_measures({sample, n}, {levels, n_levels});
        for (size_t k = 0; k < n_levels; ++k) {
            var[k] = s.var[k];
            tvar[k] = s.tvar[k];
        }
        if (mean) *mean = s.mean;
        if (sd) *sd = s.sd;
    });
}

atrp_status atrp_risk_capital(const double* sample, size_t n, double* out) {
    return guarded([&] {
        need(sample, "sample");
        need(out, "out");
        const double levels[] = {0.60, 0.95};
        *out = atrp::risk_capital(atrp::risk_measures({sample, n}, levels));
    });
}

atrp_status atrp_mape(double estimate, double truth, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = atrp::mape(estimate, truth);
    });
}

atrp_status atrp_chain_ladder(const double* cumulative, size_t t, double* reserve, double* standard_error) {
    return guarded([&] {
        need(cumulative, "cumulative");
        std::vector<std::vector<double>> rows(t);
        for (size_t i = 0; i < t; ++i) rows[i].assign(cumulative + i * t, cumulative + i * t + (t - i));
        const auto r = atrp::chain_ladder_mack(atrp::RunoffTriangle::from_cumulative(rows));
        if (reserve) *reserve = r.reserve;
        if (standard_error) *standard_error = r.standard_error;
    });
}

atrp_status atrp_gg_cdf(double a, double b, double c, double x, double* out) {
    return guarded([&] {
        need(out, "out");
        const atrp::GeneralizedGammaDelay d{a, b, c};
        d.validate();
        *out = atrp::gg_cdf(d, x);
    });
}

}  // extern "C"
