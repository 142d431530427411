// Command-line front end. Talks to the engine only through the C API.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "atrp/atrp.h"

namespace {

constexpr int kUsageError = 64;

struct Failure {
    atrp_status status;
};

void check(atrp_status s) {
    if (s != ATRP_OK) throw Failure{s};
}

template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() {
        if (p) Free(p);
    }
};

using Config = Handle<atrp_config, atrp_config_free>;
using Claims = Handle<atrp_claims, atrp_claims_free>;
using Bundle = Handle<atrp_bundle, atrp_bundle_free>;
using Report = Handle<atrp_report, atrp_report_free>;

struct Options {
    std::string config;
    std::string claims;
    std::string bundle;
    std::string out;
    std::string format = "json";
    std::string in;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> sims;
    std::optional<unsigned> workers;
    bool trp_settlement = false;
};

void print_string(char* s) {
    std::fputs(s, stdout);
    if (*s && s[std::char_traits<char>::length(s) - 1] != '\n') std::fputc('\n', stdout);
    atrp_string_free(s);
}

void emit(const atrp_report* r, const Options& o) {
    if (!o.out.empty()) {
        check(atrp_report_write(r, o.format.c_str(), o.out.c_str()));
        return;
    }
    char* s = nullptr;
    if (o.format == "json") {
        check(atrp_report_to_json(r, &s));
    } else if (o.format == "text") {
        check(atrp_report_to_text(r, &s));
    } else {
        std::fprintf(stderr, "atrp: --out is required for the %s format\n", o.format.c_str());
        std::exit(kUsageError);
    }
    print_string(s);
}

void load_config(const Options& o, Config& cfg) {
    check(atrp_config_load(o.config.c_str(), &cfg.p));
    if (o.seed) check(atrp_config_set_seed(cfg.p, *o.seed));
    if (o.sims) check(atrp_config_set_sims(cfg.p, *o.sims));
    if (o.workers) check(atrp_config_set_workers(cfg.p, *o.workers));
}

void load_claims(const Options& o, const Config& cfg, Claims& claims) {
    check(atrp_claims_load(o.claims.c_str(), cfg.p, &claims.p));
    const std::size_t n = atrp_claims_rejected_count(claims.p);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t line = 0;
        const char* reason = nullptr;
        check(atrp_claims_rejected_row(claims.p, k, &line, &reason));
        std::fprintf(stderr, "atrp: warning: %s line %zu rejected: %s\n", o.claims.c_str(), line, reason);
    }
}

int run_tasks(const Options& o, unsigned tasks) {
    Config cfg;
    Claims claims;
    Bundle bundle;
    load_config(o, cfg);
    if (!o.claims.empty()) load_claims(o, cfg, claims);
    if (!o.bundle.empty()) check(atrp_bundle_load(o.bundle.c_str(), &bundle.p));
    Report report;
    check(atrp_run(cfg.p, claims.p, bundle.p, tasks, &report.p));
    emit(report.p, o);
    return 0;
}

int calibrate(const Options& o) {
    Config cfg;
    Claims claims;
    Bundle bundle;
    load_config(o, cfg);
    load_claims(o, cfg, claims);
    check(atrp_calibrate(claims.p, cfg.p, &bundle.p));
    check(atrp_bundle_save(bundle.p, o.out.c_str()));
    return 0;
}

int rerender(const Options& o) {
    Report report;
    check(atrp_report_load(o.in.c_str(), &report.p));
    emit(report.p, o);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Micro-level stochastic loss reserving with the conditional aggregate trend renewal process"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(atrp_version()));
    Options o;

    const auto common = [&](CLI::App* sub, bool claims_required) {
        sub->add_option("--config", o.config, "Scenario configuration (JSON)")->required()->check(CLI::ExistingFile);
        auto* c = sub->add_option("--claims", o.claims, "Claims file (delimited text with a header row)");
        c->check(CLI::ExistingFile);
        if (claims_required) c->required();
        sub->add_option("--bundle", o.bundle, "Fitted model bundle; calibrated from --claims when absent")
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Override the configured seed");
        sub->add_option("--sims", o.sims, "Override the configured number of simulations")->check(CLI::PositiveNumber);
        sub->add_option("--workers", o.workers, "Worker threads (0: all cores)");
        sub->add_option("--out", o.out, "Output path (directory for csv); stdout when absent");
        sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv", "text"}));
    };

    auto* cal = app.add_subcommand("calibrate", "Fit delay, severity, inflation and copula models");
    cal->add_option("--config", o.config, "Scenario configuration (JSON)")->required()->check(CLI::ExistingFile);
    cal->add_option("--claims", o.claims, "Claims file")->required()->check(CLI::ExistingFile);
    cal->add_option("--out", o.out, "Model bundle to write")->required();

    auto* res = app.add_subcommand("reserve", "Conditional cell and total moments by quadrature");
    common(res, true);
    auto* sim = app.add_subcommand("simulate", "Monte Carlo reserve distribution, risk measures and mixture fit");
    common(sim, true);
    sim->add_flag("--trp-settlement", o.trp_settlement, "Also simulate dependent settlement delays (zeta_trend)");
    auto* ibnr = app.add_subcommand("ibnr", "IBNR proportions from the occurrence process");
    common(ibnr, false);
    auto* upr = app.add_subcommand("upr", "UPR proportions over (t, t+h]");
    common(upr, false);
    auto* boot = app.add_subcommand("bootstrap", "Reserve distribution under parameter uncertainty");
    common(boot, true);
    auto* rep = app.add_subcommand("report", "Re-render a saved JSON report");
    rep->add_option("--in", o.in, "Report in JSON form")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", o.out, "Output path (directory for csv); stdout when absent");
    rep->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv", "text"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*cal) return calibrate(o);
        if (*res) return run_tasks(o, ATRP_TASK_RESERVE);
        if (*sim) return run_tasks(o, ATRP_TASK_RESERVE | ATRP_TASK_SIMULATE | (o.trp_settlement ? ATRP_TASK_TRP_SETTLEMENT : 0u));
        if (*ibnr) return run_tasks(o, ATRP_TASK_IBNR);
        if (*upr) return run_tasks(o, ATRP_TASK_UPR);
        if (*boot) return run_tasks(o, ATRP_TASK_SIMULATE | ATRP_TASK_BOOTSTRAP);
        if (*rep) return rerender(o);
    } catch (const Failure& f) {
        std::fprintf(stderr, "atrp: error[%s]: %s\n", atrp_status_name(f.status), atrp_last_error());
        return static_cast<int>(f.status);
    }
    return kUsageError;
}
