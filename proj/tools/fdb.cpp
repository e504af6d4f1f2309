// fdb: command-line front end for depth-based robust location/scatter
// estimation, simulation benchmarks, robust PCA diagnostics and outlier
// detection over CSV data.

#include "fdb/fdb.hpp"
#include "fdb/io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::ordered_json;

enum exit_code : int { ok = 0, usage = 1, input = 2, computation = 3 };

class usage_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string input;
    std::string output;
    std::string method = "fdb-pro";
    double alpha = 0.75;
    std::string k = "auto";
    std::uint64_t seed = 1;
    bool no_reweight = false;
    std::string threads = "auto";
    std::size_t n_starts = 500;
    bool reproducible = false;
};

std::optional<std::size_t> parse_count(const std::string& text, const char* flag, bool allow_auto = true)
{
    if (allow_auto && text == "auto")
        return std::nullopt;
    try {
        std::size_t used = 0;
        if (!text.empty() && text[0] == '-')
            throw std::invalid_argument("negative");
        const unsigned long v = std::stoul(text, &used);
        if (used != text.size() || v == 0)
            throw std::invalid_argument("bad");
        return v;
    } catch (const std::exception&) {
        throw usage_error(std::string(flag) + " must be a positive integer" + (allow_auto ? " or 'auto'" : ""));
    }
}

struct ResolvedCommon {
    fdb::MethodOptions options;
    std::optional<fdb::Method> method; ///< empty for the classical "sample" estimate
    std::size_t threads = 1;
};

ResolvedCommon resolve(const CommonOptions& c, bool allow_sample)
{
    ResolvedCommon r;
    if (c.method == "sample") {
        if (!allow_sample)
            throw usage_error("--method sample is only available for pca and detect");
    } else {
        r.method = fdb::parse_method(c.method);
        if (!r.method)
            throw usage_error("unknown --method '" + c.method + "' (expected fdb-pro, fdb-l2 or fastmcd)");
    }
    if (!(c.alpha >= 0.5 && c.alpha <= 1.0))
        throw usage_error("--alpha must lie in [0.5, 1]");
    r.threads = fdb::resolve_threads(parse_count(c.threads, "--threads").value_or(0));
    r.options.alpha = c.alpha;
    r.options.k = parse_count(c.k, "--k");
    r.options.seed = c.seed;
    r.options.reweight = !c.no_reweight;
    r.options.threads = r.threads;
    r.options.n_starts = c.n_starts;
    if (c.n_starts == 0)
        throw usage_error("--n-starts must be positive");
    return r;
}

void add_common(CLI::App& cmd, CommonOptions& c, bool with_method = true)
{
    cmd.add_option("-i,--input", c.input, "input CSV (rows = samples)")->required();
    cmd.add_option("-o,--output", c.output, "output path")->required();
    if (with_method) {
        cmd.add_option("--method", c.method, "fdb-pro | fdb-l2 | fastmcd")->capture_default_str();
        cmd.add_option("--alpha", c.alpha, "subset fraction, h = floor(alpha n)")->capture_default_str();
        cmd.add_flag("--no-reweight", c.no_reweight, "skip the reweighting step");
        cmd.add_option("--n-starts", c.n_starts, "random starts for fastmcd")->capture_default_str();
    }
    cmd.add_option("--k", c.k, "projection directions or 'auto' (max(1000, 10p))")->capture_default_str();
    cmd.add_option("--seed", c.seed, "RNG seed")->capture_default_str();
    cmd.add_option("--threads", c.threads, "worker threads or 'auto' (FDB_THREADS, then hardware)")
        ->capture_default_str();
    cmd.add_flag("--reproducible", c.reproducible, "write zero timings so outputs are byte-identical");
}

json to_json(std::span<const double> v)
{
    json a = json::array();
    for (double x : v)
        a.push_back(x);
    return a;
}

json to_json(const fdb::Matrix& m)
{
    json a = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i)
        a.push_back(to_json(m.row(i)));
    return a;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct Estimated {
    fdb::LocationScatter estimate;
    std::optional<fdb::EstimationReport> report;
    double seconds = 0.0;
};

Estimated estimate_for(const fdb::DataMatrix& data, const ResolvedCommon& r, bool reproducible)
{
    Estimated e;
    if (!r.method) {
        const auto t0 = std::chrono::steady_clock::now();
        e.estimate = fdb::sample_mean_cov(data);
        e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else {
        e.report = fdb::run_method(data, *r.method, r.options);
        e.estimate = e.report->estimate;
        e.seconds = e.report->elapsed_seconds;
        for (const auto& w : e.report->warnings)
            std::cerr << "fdb: warning: " << w << '\n';
    }
    if (reproducible)
        e.seconds = 0.0;
    return e;
}

json method_json(const CommonOptions& c, const ResolvedCommon& r, const Estimated& e)
{
    json j;
    j["method"] = c.method;
    j["alpha"] = c.alpha;
    if (e.report && e.report->k > 0)
        j["k"] = e.report->k;
    else
        j["k"] = nullptr;
    j["seed"] = c.seed;
    j["threads"] = r.threads;
    return j;
}

int cmd_estimate(const CommonOptions& c)
{
    const auto r = resolve(c, false);
    const auto data = fdb::io::read_csv(c.input);
    const auto e = estimate_for(data, r, c.reproducible);
    const auto& rep = *e.report;

    json j;
    j["mu"] = to_json(rep.estimate.mu);
    j["sigma"] = to_json(rep.estimate.sigma);
    j["subset"] = rep.subset.indices();
    std::vector<int> weights(rep.weights.begin(), rep.weights.end());
    j["weights"] = weights;
    j["c0"] = rep.c0;
    j["c1"] = rep.c1;
    for (const json info = method_json(c, r, e); auto& [key, value] : info.items())
        j[key] = value;
    j["reweight"] = r.options.reweight;
    j["h"] = rep.h;
    j["n"] = data.n();
    j["p"] = data.p();
    j["elapsed_seconds"] = e.seconds;
    fdb::io::atomic_write(c.output, dump(j));
    return ok;
}

int cmd_depth(const CommonOptions& c, const std::string& depth_kind)
{
    const std::size_t threads = fdb::resolve_threads(parse_count(c.threads, "--threads").value_or(0));
    const auto k = parse_count(c.k, "--k");
    if (depth_kind != "projection" && depth_kind != "l2")
        throw usage_error("--depth must be 'projection' or 'l2'");
    const auto data = fdb::io::read_csv(c.input);
    const auto depths = fdb::with_stage("depth", [&] {
        if (depth_kind == "l2")
            return fdb::l2_depth(data, threads);
        return fdb::projection_depth(
            data, fdb::sample_directions(data.p(), k.value_or(fdb::default_direction_count(data.p())), c.seed),
            threads);
    });
    std::ostringstream out;
    out << "index,depth\n";
    for (std::size_t i = 0; i < depths.size(); ++i)
        out << i << ',' << fdb::io::format_double(depths[i]) << '\n';
    fdb::io::atomic_write(c.output, out.str());
    return ok;
}

int cmd_pca(const CommonOptions& c, std::size_t components, std::string model_path)
{
    const auto r = resolve(c, true);
    const auto data = fdb::io::read_csv(c.input);
    if (components == 0 || components > data.p())
        throw usage_error("--components must lie in [1, p]");
    const auto e = estimate_for(data, r, c.reproducible);
    const auto model = fdb::with_stage("pca", [&] { return fdb::robust_pca(data, e.estimate, components); });
    const auto diag = fdb::pca_diagnostics(data, model);
    const auto d2 = fdb::mahalanobis_sq(data, e.estimate);
    const double cutoff = std::sqrt(fdb::chi_square_quantile(static_cast<unsigned>(data.p()), 0.975));

    std::ostringstream out;
    out << "index,sd,od,category,distance,flag\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double d = std::sqrt(d2[i]);
        out << i << ',' << fdb::io::format_double(diag.sd[i]) << ',' << fdb::io::format_double(diag.od[i]) << ','
            << fdb::to_string(diag.category[i]) << ',' << fdb::io::format_double(d) << ',' << (d > cutoff ? 1 : 0)
            << '\n';
    }

    json j;
    j["mu"] = to_json(model.mu);
    j["loadings"] = to_json(model.loadings);
    j["eigenvalues"] = to_json(model.eigenvalues);
    j["components"] = components;
    j["sd_cutoff"] = diag.sd_cutoff;
    j["od_cutoff"] = diag.od_cutoff;
    j["distance_cutoff"] = cutoff;
    for (const json info = method_json(c, r, e); auto& [key, value] : info.items())
        j[key] = value;
    j["elapsed_seconds"] = e.seconds;

    if (model_path.empty())
        model_path = c.output + ".model.json";
    fdb::io::atomic_write(c.output, out.str());
    fdb::io::atomic_write(model_path, dump(j));
    return ok;
}

int cmd_detect(const CommonOptions& c, const std::string& rule_text, const std::string& labels_path,
               std::string summary_path)
{
    const auto r = resolve(c, true);
    const auto rule = fdb::parse_rule(rule_text);
    if (!rule)
        throw usage_error("--rule must be chi2:<prob> or top:<m>");
    const auto data = fdb::io::read_csv(c.input);
    std::optional<std::vector<bool>> labels;
    if (!labels_path.empty()) {
        labels = fdb::io::read_labels(labels_path);
        if (labels->size() != data.n())
            throw fdb::io::input_error(labels_path + ": " + std::to_string(labels->size()) + " labels for " +
                                       std::to_string(data.n()) + " samples");
    }
    if (const auto* top = std::get_if<fdb::TopRule>(&*rule); top && top->m > data.n())
        throw usage_error("top:" + std::to_string(top->m) + " exceeds the sample count");
    const auto e = estimate_for(data, r, c.reproducible);
    const auto result = fdb::with_stage("detect", [&] { return fdb::detect_outliers(data, e.estimate, *rule, labels); });

    std::ostringstream out;
    out << "index,distance,flag\n";
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        out << i << ',' << fdb::io::format_double(result.distances[i]) << ',' << (result.flags[i] ? 1 : 0) << '\n';
        flagged += result.flags[i] ? 1 : 0;
    }
    json j;
    j["rule"] = rule_text;
    j["cutoff"] = finite_or_null(result.cutoff);
    j["n_flagged"] = flagged;
    j["auc"] = result.auc ? json(*result.auc) : json(nullptr);
    for (const json info = method_json(c, r, e); auto& [key, value] : info.items())
        j[key] = value;
    j["elapsed_seconds"] = e.seconds;
    if (summary_path.empty())
        summary_path = c.output + ".summary.json";
    fdb::io::atomic_write(c.output, out.str());
    fdb::io::atomic_write(summary_path, dump(j));
    return ok;
}

struct BenchmarkOptions {
    std::string output;
    std::vector<std::string> settings{"A"};
    std::vector<std::string> contamination{"none"};
    std::vector<double> epsilon;
    double r = 5.0;
    std::size_t replicates = 100;
    std::vector<std::string> methods{"fdb-pro", "fdb-l2", "fastmcd"};
    std::optional<double> alpha;
    std::string k = "auto";
    std::size_t n_starts = 500;
    std::uint64_t seed = 1;
    std::string threads = "auto";
    double off_diagonal = 0.75;
    int decimals = 3;
    bool reproducible = false;
};

int cmd_benchmark(const BenchmarkOptions& b)
{
    fdb::BenchmarkGrid grid;
    for (const auto& s : b.settings) {
        auto setting = fdb::parse_setting(s);
        if (!setting)
            throw usage_error("unknown --setting '" + s + "' (expected A, B, C or <n>x<p>)");
        grid.settings.push_back(*setting);
    }
    std::vector<double> eps = b.epsilon;
    for (double e : eps)
        if (!(e >= 0.0 && e <= 0.5))
            throw usage_error("--epsilon values must lie in [0, 0.5]");
    for (const auto& name : b.contamination) {
        const auto kind = fdb::parse_contamination_kind(name);
        if (!kind)
            throw usage_error("unknown --contamination '" + name + "'");
        if (*kind == fdb::ContaminationKind::none) {
            grid.contaminations.push_back({*kind, 0.0, b.r});
            continue;
        }
        const std::vector<double> levels = eps.empty() ? std::vector<double>{0.1} : eps;
        for (double e : levels)
            grid.contaminations.push_back({*kind, e, b.r});
    }
    for (const auto& m : b.methods) {
        const auto method = fdb::parse_method(m);
        if (!method)
            throw usage_error("unknown method '" + m + "' in --methods");
        grid.methods.push_back(*method);
    }
    if (b.replicates == 0)
        throw usage_error("--replicates must be positive");
    if (b.alpha && !(*b.alpha >= 0.5 && *b.alpha <= 1.0))
        throw usage_error("--alpha must lie in [0.5, 1]");
    if (b.decimals < 0 || b.decimals > 17)
        throw usage_error("--decimals must lie in [0, 17]");
    grid.replicates = b.replicates;
    grid.seed = b.seed;
    grid.threads = fdb::resolve_threads(parse_count(b.threads, "--threads").value_or(0));
    grid.off_diagonal = b.off_diagonal;
    grid.alpha = b.alpha;
    grid.k = parse_count(b.k, "--k");
    grid.n_starts = b.n_starts;
    grid.record_time = !b.reproducible;

    std::cerr << "fdb benchmark: " << grid.threads << " thread(s), " << grid.replicates << " replicate(s) per cell\n";
    const auto cells = fdb::run_benchmark(grid, [](const fdb::BenchmarkCell& cell, std::size_t done, std::size_t total) {
        std::cerr << "[" << done << "/" << total << "] " << cell.setting.name << ' '
                  << fdb::to_string(cell.contamination.kind) << " eps=" << cell.contamination.epsilon << ' '
                  << fdb::to_string(cell.method) << ": " << cell.replicates << " ok, " << cell.failures << " failed"
                  << (cell.flagged ? " [FLAGGED]" : "") << '\n';
    });
    std::ostringstream out;
    fdb::write_benchmark_csv(out, cells, b.decimals);
    fdb::io::atomic_write(b.output, out.str());
    for (const auto& cell : cells)
        if (cell.flagged)
            std::cerr << "fdb: warning: cell " << cell.setting.name << '/' << fdb::to_string(cell.contamination.kind)
                      << '/' << fdb::to_string(cell.method) << " failed in " << cell.failures << " replicate(s)\n";
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Depth-based robust location and scatter estimation"};
    app.name("fdb");
    app.require_subcommand(1);

    CommonOptions est_opts, pca_opts, det_opts, depth_opts;
    auto* estimate = app.add_subcommand("estimate", "robust mean/covariance of a CSV data set (JSON output)");
    add_common(*estimate, est_opts);

    auto* pca = app.add_subcommand("pca", "robust PCA score/orthogonal distance diagnostics (CSV + model JSON)");
    add_common(*pca, pca_opts);
    std::size_t components = 2;
    std::string model_path;
    pca->add_option("--components", components, "number of principal components K")->capture_default_str();
    pca->add_option("--model", model_path, "model JSON path (default <output>.model.json)");

    auto* detect = app.add_subcommand("detect", "robust-distance outlier flags (CSV + summary JSON)");
    add_common(*detect, det_opts);
    std::string rule = "chi2:0.975";
    std::string labels_path;
    std::string summary_path;
    detect->add_option("--rule", rule, "chi2:<prob> or top:<m>")->capture_default_str();
    detect->add_option("--labels", labels_path, "optional 0/1 outlier labels, one per row");
    detect->add_option("--summary", summary_path, "summary JSON path (default <output>.summary.json)");

    auto* depth = app.add_subcommand("depth", "per-sample depth values (CSV)");
    add_common(*depth, depth_opts, false);
    std::string depth_kind = "projection";
    depth->add_option("--depth", depth_kind, "projection | l2")->capture_default_str();

    BenchmarkOptions bench_opts;
    auto* bench = app.add_subcommand("benchmark", "Monte-Carlo contamination benchmark (CSV table)");
    bench->add_option("-o,--output", bench_opts.output, "output CSV")->required();
    bench->add_option("--setting", bench_opts.settings, "A, B, C or <n>x<p>")->delimiter(',')->capture_default_str();
    bench->add_option("--contamination", bench_opts.contamination, "none, point, random, cluster, radial")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--epsilon", bench_opts.epsilon, "contamination fractions (default 0.1)")->delimiter(',');
    bench->add_option("--r", bench_opts.r, "abnormality level")->capture_default_str();
    bench->add_option("--replicates", bench_opts.replicates, "replicates per cell")->capture_default_str();
    bench->add_option("--methods", bench_opts.methods, "fdb-pro, fdb-l2, fastmcd")->delimiter(',')->capture_default_str();
    bench->add_option("--alpha", bench_opts.alpha, "subset fraction (default 0.75, or 0.5 when eps > 0.25)");
    bench->add_option("--k", bench_opts.k, "projection directions or 'auto'")->capture_default_str();
    bench->add_option("--n-starts", bench_opts.n_starts, "random starts for fastmcd")->capture_default_str();
    bench->add_option("--off-diagonal", bench_opts.off_diagonal, "off-diagonal value of G")->capture_default_str();
    bench->add_option("--seed", bench_opts.seed, "RNG seed")->capture_default_str();
    bench->add_option("--threads", bench_opts.threads, "worker threads or 'auto'")->capture_default_str();
    bench->add_option("--decimals", bench_opts.decimals, "decimals for mean and sd")->capture_default_str();
    bench->add_flag("--reproducible", bench_opts.reproducible, "write zero timings so output is byte-identical");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "fdb: usage error: " << e.what() << '\n';
        return usage;
    }

    try {
        if (*estimate)
            return cmd_estimate(est_opts);
        if (*pca)
            return cmd_pca(pca_opts, components, model_path);
        if (*detect)
            return cmd_detect(det_opts, rule, labels_path, summary_path);
        if (*depth)
            return cmd_depth(depth_opts, depth_kind);
        if (*bench)
            return cmd_benchmark(bench_opts);
    } catch (const usage_error& e) {
        std::cerr << "fdb: usage error: " << e.what() << '\n';
        return usage;
    } catch (const fdb::io::input_error& e) {
        std::cerr << "fdb: input error: " << e.what() << '\n';
        return input;
    } catch (const fdb::error& e) {
        std::cerr << "fdb: computation error" << (e.stage().empty() ? "" : " in stage '" + e.stage() + "'") << ": "
                  << e.what() << '\n';
        return computation;
    }
    return usage;
}
