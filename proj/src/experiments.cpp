#include "mfg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mfg/fixed_point.hpp"
#include "mfg/generators.hpp"
#include "mfg/model.hpp"
#include "mfg/nash.hpp"
#include "mfg/numeric.hpp"
#include "mfg/parallel.hpp"
#include "mfg/particles.hpp"
#include "mfg/rng.hpp"
#include "mfg/sensitivity.hpp"
#include "mfg/spde.hpp"

namespace mfg {

namespace {

void throw_if_invalid(const ExperimentConfig& cfg, std::vector<std::string> allowed,
                      std::vector<std::string> extra_problems) {
    const std::vector<std::string> common = {
        "model.",    "grid.x_min", "grid.x_max", "grid.n_points", "time.T",
        "time.dt",   "seeds",      "seed.master", "seed.offset",  "workers",
        "init.mean", "init.sd",    "bandwidth"};
    allowed.insert(allowed.end(), common.begin(), common.end());
    std::vector<std::string> problems = cfg.validate(allowed);
    problems.insert(problems.end(), extra_problems.begin(), extra_problems.end());
    if (!problems.empty()) {
        std::string msg = "config: invalid configuration:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw std::runtime_error(msg);
    }
}

struct CommonSetup {
    ModelCoefficients model;
    Grid1D grid;
    double T = 0.0;
    double dt = 0.0;
    int n_steps = 0;
    int seeds = 0;
    uint32_t master_seed = 0;
    uint32_t seed_offset = 0;
    int workers = 1;
    double init_mean = 0.0;
    double init_sd = 1.0;
};

CommonSetup load_common(const ExperimentConfig& cfg, bool needs_grid_cfl,
                        std::vector<std::string>* problems) {
    CommonSetup s;
    s.model = make_model(cfg.get_string("model.name", "ou-common"), cfg.model_params());
    s.grid = Grid1D(cfg.get_double("grid.x_min", -6.0), cfg.get_double("grid.x_max", 6.0),
                    cfg.get_int("grid.n_points", 241));
    s.T = cfg.get_double("time.T", 0.25);
    s.dt = cfg.get_double("time.dt", 1e-3);
    if (s.T <= 0.0) problems->push_back("time.T must be positive");
    if (s.dt <= 0.0) problems->push_back("time.dt must be positive");
    s.n_steps = std::max(1, static_cast<int>(std::lround(s.T / s.dt)));
    s.seeds = cfg.get_int("seeds", 100);
    if (s.seeds < 1) problems->push_back("seeds must be >= 1");
    s.master_seed = static_cast<uint32_t>(cfg.get_int("seed.master", 1));
    s.seed_offset = static_cast<uint32_t>(cfg.get_int("seed.offset", 0));
    s.workers = cfg.get_int("workers", 1);
    s.init_mean = cfg.get_double("init.mean", 0.0);
    s.init_sd = cfg.get_double("init.sd", 1.0);
    if (s.init_sd <= 0.0) problems->push_back("init.sd must be positive");
    try {
        s.model.validate_on_grid(s.grid);
    } catch (const std::exception& e) {
        problems->push_back(e.what());
    }
    if (needs_grid_cfl) {
        double dmax = 0.0;
        for (int j = 0; j < s.grid.n_points; ++j)
            dmax = std::max(dmax, s.model.sigma_tot_sq(s.grid.x(j)));
        if (dmax > 0.0 && s.dt > s.grid.h * s.grid.h / dmax) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "time.dt = %g violates the parabolic CFL dt <= h^2/max(sigma^2) = %g",
                          s.dt, s.grid.h * s.grid.h / dmax);
            problems->push_back(buf);
        }
    }
    return s;
}

// The chaos functionals in sufficient-statistic form, evaluated the same
// way on particle ensembles and on grid densities: mean, variance
// (pair kernel (x-y)^2/2), squared mean (pair kernel xy) and the
// positive-definite pair kernel cos(x-y).
enum class StatKind { mean, variance, mean_sq, cos_pair };

struct StatFunctional {
    StatKind kind;
    std::string name;
    bool expect_exact;  // gap is pure MC noise; the slope fit skips it
};

struct SuffStats {
    double m1 = 0.0, m2 = 0.0, c = 0.0, s = 0.0;
};

SuffStats stats_of_atoms(const std::vector<double>& x, int begin, int count) {
    SuffStats st;
    for (int i = begin; i < begin + count; ++i) {
        const double v = x[static_cast<size_t>(i)];
        st.m1 += v;
        st.m2 += v * v;
        st.c += std::cos(v);
        st.s += std::sin(v);
    }
    const double inv = 1.0 / count;
    st.m1 *= inv; st.m2 *= inv; st.c *= inv; st.s *= inv;
    return st;
}

SuffStats stats_of_grid(const GridMeasure& m) {
    SuffStats st;
    for (int j = 0; j < m.grid.n_points; ++j) {
        const double w = m.quad_weight(j) * m.density[static_cast<size_t>(j)];
        const double v = m.grid.x(j);
        st.m1 += w * v;
        st.m2 += w * v * v;
        st.c += w * std::cos(v);
        st.s += w * std::sin(v);
    }
    return st;
}

double stat_value(StatKind kind, const SuffStats& st) {
    switch (kind) {
        case StatKind::mean: return st.m1;
        case StatKind::variance: return st.m2 - st.m1 * st.m1;
        case StatKind::mean_sq: return st.m1 * st.m1;
        case StatKind::cos_pair: return st.c * st.c + st.s * st.s;
    }
    return 0.0;
}

std::vector<StatFunctional> chaos_gallery() {
    return {{StatKind::mean, "mean", true},
            {StatKind::variance, "variance", false},
            {StatKind::mean_sq, "mean-squared", false},
            {StatKind::cos_pair, "cos-pair", false}};
}

// Log-log rate fit over the levels whose Monte Carlo standard error stays
// below 30% of the gap estimate; excluded levels are reported.
struct SlopeResult {
    bool fitted = false;
    LineFit fit;
    std::vector<int> used_N;
    std::vector<int> excluded_N;
    std::string note;
};

SlopeResult fit_log_slope(const std::vector<int>& N_list, const std::vector<double>& gaps,
                          const std::vector<double>& ses, bool expect_exact) {
    SlopeResult res;
    if (expect_exact) {
        res.note = "gap matches exactly by construction; slope test skipped";
        res.excluded_N = N_list;
        return res;
    }
    std::vector<double> x, y, sd;
    for (size_t i = 0; i < N_list.size(); ++i) {
        if (gaps[i] > 0.0 && ses[i] < 0.3 * gaps[i]) {
            x.push_back(std::log(static_cast<double>(N_list[i])));
            y.push_back(std::log(gaps[i]));
            sd.push_back(ses[i] / gaps[i]);
            res.used_N.push_back(N_list[i]);
        } else {
            res.excluded_N.push_back(N_list[i]);
        }
    }
    if (x.size() < 4) {
        res.note = "fewer than 4 usable levels; slope not computed";
        return res;
    }
    res.fit = wls_fit(x, y, sd);
    res.fitted = true;
    return res;
}

json slope_to_json(const SlopeResult& s) {
    json j;
    j["fitted"] = s.fitted;
    if (s.fitted) {
        j["slope"] = s.fit.slope;
        j["slope_se"] = s.fit.slope_se;
        j["ci95_lo"] = s.fit.slope - 1.96 * s.fit.slope_se;
        j["ci95_hi"] = s.fit.slope + 1.96 * s.fit.slope_se;
    }
    j["used_N"] = s.used_N;
    j["excluded_N"] = s.excluded_N;
    if (!s.note.empty()) j["note"] = s.note;
    return j;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

json run_chaos(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::vector<std::string> problems;
    CommonSetup s = load_common(cfg, true, &problems);
    const std::vector<int> N_list = cfg.get_int_list("chaos.N_list", {50, 100, 200, 400, 800});
    const int rows = cfg.get_int("chaos.rows_per_seed",
                                 *std::max_element(N_list.begin(), N_list.end()));
    const bool milstein = cfg.get_bool("chaos.milstein", true);
    for (int N : N_list) {
        if (N < 1) problems.push_back("chaos.N_list entries must be positive");
        else if (rows < N) problems.push_back("chaos.rows_per_seed must cover the largest N");
    }
    throw_if_invalid(cfg, {"chaos."}, problems);

    const auto gallery = chaos_gallery();
    const int n_func = static_cast<int>(gallery.size());
    const int n_levels = static_cast<int>(N_list.size());
    const GridMeasure v0 = gaussian_measure(s.grid, s.init_mean, s.init_sd);
    const Policy u0 = zero_policy();

    // delta[seed][level][functional]
    std::vector<std::vector<std::vector<double>>> delta(
        static_cast<size_t>(s.seeds),
        std::vector<std::vector<double>>(static_cast<size_t>(n_levels),
                                         std::vector<double>(static_cast<size_t>(n_func), 0.0)));

    parallel_for_indexed(s.seeds, s.workers, [&](int seed) {
        const NoiseBundle noise(s.dt, s.n_steps, rows, s.master_seed,
                                s.seed_offset + static_cast<uint32_t>(seed));
        // Limit side: one grid solve along this W path.
        GridMeasure v = v0;
        for (int n = 0; n < s.n_steps; ++n)
            v = step_ito(s.model, u0, v, n * s.dt, noise.dW(n), s.dt, milstein);
        const SuffStats limit_stats = stats_of_grid(v);

        // Particle side: group-averaged estimates with nested B rows.
        std::vector<double> x, x_next;
        for (int l = 0; l < n_levels; ++l) {
            const int N = N_list[static_cast<size_t>(l)];
            const int groups = rows / N;
            std::vector<double> acc(static_cast<size_t>(n_func), 0.0);
            for (int g = 0; g < groups; ++g) {
                const int off = g * N;
                x.resize(static_cast<size_t>(N));
                for (int i = 0; i < N; ++i)
                    x[static_cast<size_t>(i)] = s.init_mean + s.init_sd * noise.init_normal(off + i);
                for (int n = 0; n < s.n_steps; ++n) {
                    step_positions(x, x_next, s.model, nullptr, u0, n * s.dt, s.dt, noise.dW(n),
                                   [&](int i) { return noise.dB(off + i, n); }, n);
                    x.swap(x_next);
                }
                const SuffStats st = stats_of_atoms(x, 0, N);
                for (int f = 0; f < n_func; ++f)
                    acc[static_cast<size_t>(f)] += stat_value(gallery[static_cast<size_t>(f)].kind, st);
            }
            for (int f = 0; f < n_func; ++f)
                delta[static_cast<size_t>(seed)][static_cast<size_t>(l)][static_cast<size_t>(f)] =
                    acc[static_cast<size_t>(f)] / groups -
                    stat_value(gallery[static_cast<size_t>(f)].kind, limit_stats);
        }
    });

    json report = report_skeleton("chaos", cfg.resolved());
    json functionals = json::array();
    std::string csv = "functional,N,gap,mean_delta,se,used_in_fit\n";
    for (int f = 0; f < n_func; ++f) {
        std::vector<double> gaps(static_cast<size_t>(n_levels)), ses(static_cast<size_t>(n_levels)),
            means(static_cast<size_t>(n_levels));
        for (int l = 0; l < n_levels; ++l) {
            std::vector<double> d(static_cast<size_t>(s.seeds));
            for (int seed = 0; seed < s.seeds; ++seed)
                d[static_cast<size_t>(seed)] =
                    delta[static_cast<size_t>(seed)][static_cast<size_t>(l)][static_cast<size_t>(f)];
            means[static_cast<size_t>(l)] = mean(d);
            gaps[static_cast<size_t>(l)] = std::fabs(means[static_cast<size_t>(l)]);
            ses[static_cast<size_t>(l)] = standard_error(d);
        }
        const SlopeResult slope =
            fit_log_slope(N_list, gaps, ses, gallery[static_cast<size_t>(f)].expect_exact);
        json jf;
        jf["name"] = gallery[static_cast<size_t>(f)].name;
        jf["expect_exact"] = gallery[static_cast<size_t>(f)].expect_exact;
        jf["N"] = N_list;
        jf["gap"] = gaps;
        jf["mean_delta"] = means;
        jf["se"] = ses;
        jf["slope"] = slope_to_json(slope);
        functionals.push_back(jf);
        for (int l = 0; l < n_levels; ++l) {
            const bool used = std::find(slope.used_N.begin(), slope.used_N.end(),
                                        N_list[static_cast<size_t>(l)]) != slope.used_N.end();
            csv += gallery[static_cast<size_t>(f)].name + "," +
                   std::to_string(N_list[static_cast<size_t>(l)]) + "," +
                   format_double(gaps[static_cast<size_t>(l)]) + "," +
                   format_double(means[static_cast<size_t>(l)]) + "," +
                   format_double(ses[static_cast<size_t>(l)]) + "," + (used ? "1" : "0") + "\n";
        }
    }
    report["rows_per_seed"] = rows;
    report["functionals"] = functionals;
    ensure_directory(out_dir);
    write_text_file(out_dir + "/chaos_gaps.csv", csv);
    write_report_json(out_dir, report);
    write_meta_json(out_dir, "chaos");
    return report;
}

json run_tagged_chaos(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::vector<std::string> problems;
    CommonSetup s = load_common(cfg, true, &problems);
    const std::vector<int> N_list = cfg.get_int_list("tagged.N_list", {25, 50, 100, 200});
    const int rows = cfg.get_int("tagged.rows_per_seed",
                                 *std::max_element(N_list.begin(), N_list.end()));
    const double u_ind_value = cfg.get_double("tagged.u_ind", 1.0);
    const double u_com_value = cfg.get_double("tagged.u_com", 0.0);
    const bool milstein = cfg.get_bool("tagged.milstein", true);
    for (int N : N_list) {
        if (N < 1) problems.push_back("tagged.N_list entries must be positive");
        else if (rows < N) problems.push_back("tagged.rows_per_seed must cover the largest N");
    }
    throw_if_invalid(cfg, {"tagged."}, problems);

    struct TaggedStat {
        std::string name;
        double (*eval)(double x, const SuffStats& st);
    };
    const std::vector<TaggedStat> gallery = {
        {"x", [](double x, const SuffStats&) { return x; }},
        {"x-times-mean", [](double x, const SuffStats& st) { return x * st.m1; }},
        {"x-squared", [](double x, const SuffStats&) { return x * x; }},
    };
    const int n_func = static_cast<int>(gallery.size());
    const int n_levels = static_cast<int>(N_list.size());
    const GridMeasure v0 = gaussian_measure(s.grid, s.init_mean, s.init_sd);
    const Policy u_com = constant_policy(u_com_value);
    const Policy u_ind = constant_policy(u_ind_value);

    // Distinct tagged-limit rows: group g at level N uses B row g*N.
    std::vector<std::vector<int>> level_rows(static_cast<size_t>(n_levels));
    std::set<int> tag_row_set;
    for (int l = 0; l < n_levels; ++l) {
        const int N = N_list[static_cast<size_t>(l)];
        for (int g = 0; g < rows / N; ++g) {
            level_rows[static_cast<size_t>(l)].push_back(g * N);
            tag_row_set.insert(g * N);
        }
    }
    const std::vector<int> tag_rows(tag_row_set.begin(), tag_row_set.end());

    std::vector<std::vector<std::vector<double>>> delta(
        static_cast<size_t>(s.seeds),
        std::vector<std::vector<double>>(static_cast<size_t>(n_levels),
                                         std::vector<double>(static_cast<size_t>(n_func), 0.0)));

    parallel_for_indexed(s.seeds, s.workers, [&](int seed) {
        const NoiseBundle noise(s.dt, s.n_steps, rows, s.master_seed,
                                s.seed_offset + static_cast<uint32_t>(seed));
        // Limit side: stream the SPDE under u_com and carry one tagged SDE
        // per distinct B row alongside it.
        std::vector<double> x_tag(tag_rows.size());
        for (size_t k = 0; k < tag_rows.size(); ++k)
            x_tag[k] = s.init_mean + s.init_sd * noise.init_normal(tag_rows[k]);
        GridMeasure v = v0;
        for (int n = 0; n < s.n_steps; ++n) {
            const double t = n * s.dt;
            {
                const MeasureRef mu(v);
                for (size_t k = 0; k < tag_rows.size(); ++k) {
                    const double xk = x_tag[k];
                    const double b = drift(s.model, t, xk, mu, u_ind(t, xk, mu));
                    x_tag[k] += b * s.dt + s.model.sigma_ind(xk) * noise.dB(tag_rows[k], n) +
                                s.model.sigma_com(xk) * noise.dW(n);
                }
            }
            v = step_ito(s.model, u_com, v, t, noise.dW(n), s.dt, milstein);
        }
        const SuffStats limit_stats = stats_of_grid(v);

        std::vector<double> x, x_next;
        for (int l = 0; l < n_levels; ++l) {
            const int N = N_list[static_cast<size_t>(l)];
            const auto& offsets = level_rows[static_cast<size_t>(l)];
            std::vector<double> acc(static_cast<size_t>(n_func), 0.0);
            for (int off : offsets) {
                x.resize(static_cast<size_t>(N));
                for (int i = 0; i < N; ++i)
                    x[static_cast<size_t>(i)] = s.init_mean + s.init_sd * noise.init_normal(off + i);
                for (int n = 0; n < s.n_steps; ++n) {
                    step_positions(x, x_next, s.model, &u_ind, u_com, n * s.dt, s.dt, noise.dW(n),
                                   [&](int i) { return noise.dB(off + i, n); }, n);
                    x.swap(x_next);
                }
                const SuffStats st = stats_of_atoms(x, 0, N);
                const double x_lim =
                    x_tag[static_cast<size_t>(std::lower_bound(tag_rows.begin(), tag_rows.end(), off) -
                                              tag_rows.begin())];
                for (int f = 0; f < n_func; ++f)
                    acc[static_cast<size_t>(f)] +=
                        gallery[static_cast<size_t>(f)].eval(x[0], st) -
                        gallery[static_cast<size_t>(f)].eval(x_lim, limit_stats);
            }
            for (int f = 0; f < n_func; ++f)
                delta[static_cast<size_t>(seed)][static_cast<size_t>(l)][static_cast<size_t>(f)] =
                    acc[static_cast<size_t>(f)] / static_cast<double>(offsets.size());
        }
    });

    json report = report_skeleton("tagged-chaos", cfg.resolved());
    json functionals = json::array();
    std::string csv = "functional,N,gap,mean_delta,se,used_in_fit\n";
    for (int f = 0; f < n_func; ++f) {
        std::vector<double> gaps(static_cast<size_t>(n_levels)), ses(static_cast<size_t>(n_levels)),
            means(static_cast<size_t>(n_levels));
        for (int l = 0; l < n_levels; ++l) {
            std::vector<double> d(static_cast<size_t>(s.seeds));
            for (int seed = 0; seed < s.seeds; ++seed)
                d[static_cast<size_t>(seed)] =
                    delta[static_cast<size_t>(seed)][static_cast<size_t>(l)][static_cast<size_t>(f)];
            means[static_cast<size_t>(l)] = mean(d);
            gaps[static_cast<size_t>(l)] = std::fabs(means[static_cast<size_t>(l)]);
            ses[static_cast<size_t>(l)] = standard_error(d);
        }
        const SlopeResult slope = fit_log_slope(N_list, gaps, ses, false);
        json jf;
        jf["name"] = gallery[static_cast<size_t>(f)].name;
        jf["N"] = N_list;
        jf["gap"] = gaps;
        jf["mean_delta"] = means;
        jf["se"] = ses;
        jf["slope"] = slope_to_json(slope);
        functionals.push_back(jf);
        for (int l = 0; l < n_levels; ++l) {
            const bool used = std::find(slope.used_N.begin(), slope.used_N.end(),
                                        N_list[static_cast<size_t>(l)]) != slope.used_N.end();
            csv += gallery[static_cast<size_t>(f)].name + "," +
                   std::to_string(N_list[static_cast<size_t>(l)]) + "," +
                   format_double(gaps[static_cast<size_t>(l)]) + "," +
                   format_double(means[static_cast<size_t>(l)]) + "," +
                   format_double(ses[static_cast<size_t>(l)]) + "," + (used ? "1" : "0") + "\n";
        }
    }
    report["rows_per_seed"] = rows;
    report["u_ind"] = u_ind_value;
    report["u_com"] = u_com_value;
    report["functionals"] = functionals;
    ensure_directory(out_dir);
    write_text_file(out_dir + "/tagged_gaps.csv", csv);
    write_report_json(out_dir, report);
    write_meta_json(out_dir, "tagged-chaos");
    return report;
}

json run_generator_check(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::vector<std::string> problems;
    const std::vector<int> N_list = cfg.get_int_list("generator.N_list", {2, 5, 8, 16});
    const int n_configs = cfg.get_int("generator.configs", 50);
    const double x_lo = cfg.get_double("generator.x_lo", -2.0);
    const double x_hi = cfg.get_double("generator.x_hi", 2.0);
    const double u_const = cfg.get_double("generator.u", 0.0);
    const double t_eval = cfg.get_double("generator.t", 0.3);
    const uint32_t master = static_cast<uint32_t>(cfg.get_int("seed.master", 1));
    if (n_configs < 1) problems.push_back("generator.configs must be >= 1");
    if (!(x_lo < x_hi)) problems.push_back("generator.x_lo must be < generator.x_hi");
    throw_if_invalid(cfg, {"generator."}, problems);

    const std::vector<std::string> model_names = {"ou-common", "var-a"};
    const auto gallery = functional_gallery();
    const Policy policy = constant_policy(u_const);

    json report = report_skeleton("generator-check", cfg.resolved());
    json tables = json::array();
    std::string csv = "model,functional,N,max_residual,mean_residual\n";
    double worst = 0.0;
    for (size_t mi = 0; mi < model_names.size(); ++mi) {
        const ModelCoefficients model = make_model(model_names[mi], cfg.model_params());
        for (size_t fi = 0; fi < gallery.size(); ++fi) {
            for (int N : N_list) {
                double max_res = 0.0, sum_res = 0.0;
                for (int c = 0; c < n_configs; ++c) {
                    std::vector<double> pos(static_cast<size_t>(N));
                    for (int i = 0; i < N; ++i) {
                        const double u = philox_uniform(
                            {3u, static_cast<uint32_t>((mi << 16) | (fi << 8) | static_cast<size_t>(N)),
                             static_cast<uint32_t>(c), static_cast<uint32_t>(i)},
                            {master, 0x6E6E6E6Eu});
                        pos[static_cast<size_t>(i)] = x_lo + (x_hi - x_lo) * u;
                    }
                    const double r = decomposition_residual(model, policy, t_eval,
                                                            gallery[fi], pos);
                    max_res = std::max(max_res, r);
                    sum_res += r;
                }
                worst = std::max(worst, max_res);
                json row;
                row["model"] = model_names[mi];
                row["functional"] = gallery[fi].name;
                row["N"] = N;
                row["max_residual"] = max_res;
                row["mean_residual"] = sum_res / n_configs;
                tables.push_back(row);
                csv += model_names[mi] + "," + gallery[fi].name + "," + std::to_string(N) + "," +
                       format_double(max_res) + "," + format_double(sum_res / n_configs) + "\n";
            }
        }
    }
    report["residuals"] = tables;
    report["worst_residual"] = worst;
    ensure_directory(out_dir);
    write_text_file(out_dir + "/generator_residuals.csv", csv);
    write_report_json(out_dir, report);
    write_meta_json(out_dir, "generator-check");
    return report;
}

json run_sensitivity(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::vector<std::string> problems;
    CommonSetup s = load_common(cfg, true, &problems);
    const double x0 = cfg.get_double("sens.x0", 0.5);
    const double x1 = cfg.get_double("sens.x1", -0.5);
    const double bandwidth = cfg.get_double("sens.bandwidth", 0.15);
    const double h_bump = cfg.get_double("sens.h_bump", 1e-3);
    if (bandwidth <= 0.0) problems.push_back("sens.bandwidth must be positive");
    if (h_bump <= 0.0) problems.push_back("sens.h_bump must be positive");
    throw_if_invalid(cfg, {"sens."}, problems);

    const GridMeasure v0 = gaussian_measure(s.grid, s.init_mean, s.init_sd);
    const Policy u0 = zero_policy();
    const NoiseBundle noise(s.dt, s.n_steps, 0, s.master_seed, s.seed_offset);
    const std::vector<double>& W = noise.W_path();

    const MeasurePath base = solve_spde(s.model, u0, v0, W, s.dt, SpdeMethod::characteristics);
    const SensitivityPath xi = solve_xi(s.model, u0, base, x0, bandwidth);
    const auto oracle = xi_fd_oracle(s.model, u0, v0, W, s.dt, x0, bandwidth, h_bump);
    const auto oracle_half = xi_fd_oracle(s.model, u0, v0, W, s.dt, x0, bandwidth, 0.5 * h_bump);

    const double xi_norm = std::max(1e-12, xi.xi.back().total_variation());
    const double xi_gap = l1_distance(xi.xi.back(), oracle.back()) / xi_norm;
    const double xi_gap_half = l1_distance(xi.xi.back(), oracle_half.back()) / xi_norm;
    const double xi_mass_drift = std::fabs(xi.xi.back().mass() - 1.0);

    const SensitivityPath xi_b = solve_xi(s.model, u0, base, x1, bandwidth);
    const auto eta_ab = solve_eta(s.model, u0, base, xi, xi_b);
    const auto eta_ba = solve_eta(s.model, u0, base, xi_b, xi);
    const double eta_norm = std::max(1e-12, eta_ab.back().total_variation());
    const double eta_swap_gap = l1_distance(eta_ab.back(), eta_ba.back());
    const GridMeasure eta_oracle =
        eta_fd_oracle(s.model, u0, v0, W, s.dt, x0, x1, bandwidth, std::sqrt(h_bump));
    const double eta_gap = l1_distance(eta_ab.back(), eta_oracle) / eta_norm;
    const double eta_mass = std::fabs(eta_ab.back().mass());

    json report = report_skeleton("sensitivity", cfg.resolved());
    report["bump_point"] = x0;
    report["bump_point_2"] = x1;
    report["bandwidth"] = bandwidth;
    report["h_bump"] = h_bump;
    report["xi_rel_l1_gap"] = xi_gap;
    report["xi_rel_l1_gap_half_bump"] = xi_gap_half;
    report["xi_mass_drift"] = xi_mass_drift;
    report["eta_swap_l1_gap"] = eta_swap_gap;
    report["eta_rel_l1_gap"] = eta_gap;
    report["eta_mass"] = eta_mass;

    std::string csv = "check,value\n";
    csv += "xi_rel_l1_gap," + format_double(xi_gap) + "\n";
    csv += "xi_rel_l1_gap_half_bump," + format_double(xi_gap_half) + "\n";
    csv += "xi_mass_drift," + format_double(xi_mass_drift) + "\n";
    csv += "eta_swap_l1_gap," + format_double(eta_swap_gap) + "\n";
    csv += "eta_rel_l1_gap," + format_double(eta_gap) + "\n";
    csv += "eta_mass," + format_double(eta_mass) + "\n";
    ensure_directory(out_dir);
    write_text_file(out_dir + "/sensitivity_gaps.csv", csv);
    xi.xi.back().write_csv(out_dir + "/xi_final.csv");
    write_report_json(out_dir, report);
    write_meta_json(out_dir, "sensitivity");
    return report;
}

json run_mfg(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::vector<std::string> problems;
    CommonSetup s = load_common(cfg, true, &problems);
    const int n_iter = cfg.get_int("mfg.n_iter", 30);
    const double damping = cfg.get_double("mfg.damping", 0.5);
    const double tol = cfg.get_double("mfg.tol", 1e-4);
    const int n_paths = cfg.get_int("mfg.n_paths", 3);
    if (n_iter < 1) problems.push_back("mfg.n_iter must be >= 1");
    if (damping < 0.0 || damping > 1.0) problems.push_back("mfg.damping must lie in [0, 1]");
    throw_if_invalid(cfg, {"mfg."}, problems);

    const GridMeasure v0 = gaussian_measure(s.grid, s.init_mean, s.init_sd);
    json report = report_skeleton("mfg-fixed-point", cfg.resolved());
    ensure_directory(out_dir);
    std::string csv = "run,iteration,residual\n";

    bool sigma_com_zero = true;
    for (int j = 0; j < s.grid.n_points && sigma_com_zero; ++j)
        if (s.model.sigma_com(s.grid.x(j)) != 0.0) sigma_com_zero = false;

    if (sigma_com_zero) {
        const FixedPointResult det =
            mfg_fixed_point_deterministic(s.model, v0, s.dt, s.n_steps, n_iter, damping, tol);
        report["deterministic"] = {{"converged", det.converged},
                                   {"iterations", det.residual_history.size()},
                                   {"final_residual", det.residual_history.empty()
                                                          ? 0.0
                                                          : det.residual_history.back()},
                                   {"note", det.note}};
        report["deterministic"]["residual_history"] = det.residual_history;
        for (size_t k = 0; k < det.residual_history.size(); ++k)
            csv += "deterministic," + std::to_string(k) + "," +
                   format_double(det.residual_history[k]) + "\n";
        det.policy.write_csv(out_dir + "/policy_deterministic.csv");
        det.value.write_csv(out_dir + "/value_deterministic.csv");

        // Degenerate-path cross-check: a W = 0 per-path run must agree.
        const std::vector<double> W0(static_cast<size_t>(s.n_steps) + 1, 0.0);
        const FixedPointResult pp =
            mfg_fixed_point_per_path(s.model, v0, W0, s.dt, n_iter, damping, tol);
        bool identical = pp.policy.u_values == det.policy.u_values &&
                         pp.residual_history == det.residual_history;
        report["w_zero_bit_identical"] = identical;
    } else {
        json paths = json::array();
        for (int p = 0; p < n_paths; ++p) {
            const NoiseBundle noise(s.dt, s.n_steps, 0, s.master_seed,
                                    s.seed_offset + static_cast<uint32_t>(p));
            const FixedPointResult res = mfg_fixed_point_per_path(s.model, v0, noise.W_path(),
                                                                  s.dt, n_iter, damping, tol);
            json jp;
            jp["path"] = p;
            jp["converged"] = res.converged;
            jp["final_residual"] =
                res.residual_history.empty() ? 0.0 : res.residual_history.back();
            jp["residual_history"] = res.residual_history;
            jp["note"] = res.note;
            paths.push_back(jp);
            for (size_t k = 0; k < res.residual_history.size(); ++k)
                csv += "path" + std::to_string(p) + "," + std::to_string(k) + "," +
                       format_double(res.residual_history[k]) + "\n";
            if (p == 0) {
                res.policy.write_csv(out_dir + "/policy_path0.csv");
                res.value.write_csv(out_dir + "/value_path0.csv");
            }
        }
        report["per_path"] = paths;
    }

    write_text_file(out_dir + "/residuals.csv", csv);
    write_report_json(out_dir, report);
    write_meta_json(out_dir, "mfg-fixed-point");
    return report;
}

json run_nash(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::vector<std::string> problems;
    CommonSetup s = load_common(cfg, true, &problems);
    const std::vector<int> N_list = cfg.get_int_list("nash.N_list", {50, 100, 200, 400});
    const int n_iter = cfg.get_int("nash.mfg_iter", 40);
    const double damping = cfg.get_double("nash.mfg_damping", 0.5);
    const double mfg_tol = cfg.get_double("nash.mfg_tol", 1e-6);
    const std::vector<double> additive = cfg.get_double_list("nash.dev_additive", {0.1, 0.2});
    const std::vector<double> rescale = cfg.get_double_list("nash.dev_rescale", {0.5, 1.5});
    const std::vector<double> timeshift = cfg.get_double_list("nash.dev_timeshift", {0.1});
    NashOptions opt;
    opt.n_seeds = cfg.get_int("nash.seeds", 128);
    opt.groups_base = cfg.get_int("nash.groups_base", 1);
    opt.bootstrap_resamples = cfg.get_int("nash.bootstrap", 1000);
    opt.master_seed = s.master_seed;
    opt.seed_offset = s.seed_offset;
    opt.init_mean = s.init_mean;
    opt.init_sd = s.init_sd;
    opt.workers = s.workers;
    if (opt.n_seeds < 2) problems.push_back("nash.seeds must be >= 2");
    for (int j = 0; j < s.grid.n_points; ++j)
        if (s.model.sigma_com(s.grid.x(j)) != 0.0) {
            problems.push_back("nash requires sigma_com = 0 (model.a = 0): the candidate policy "
                               "comes from the deterministic fixed point");
            break;
        }
    throw_if_invalid(cfg, {"nash."}, problems);

    const GridMeasure v0 = gaussian_measure(s.grid, s.init_mean, s.init_sd);
    const FixedPointResult mfg_res =
        mfg_fixed_point_deterministic(s.model, v0, s.dt, s.n_steps, n_iter, damping, mfg_tol);
    const auto deviations =
        build_deviation_family(mfg_res.policy, s.model, additive, rescale, timeshift);
    const NashTable table =
        epsilon_nash_estimate(s.model, mfg_res.policy, deviations, N_list, s.dt, s.n_steps, opt);

    // Upper-bound curve and its log-log rate.
    std::vector<double> log_n, log_q, uppers;
    for (const auto& level : table.levels) {
        const double q = std::max(level.eps_hat, 0.0) + level.ci_half;
        uppers.push_back(q);
        if (q > 0.0) {
            log_n.push_back(std::log(static_cast<double>(level.N)));
            log_q.push_back(std::log(q));
        }
    }
    json report = report_skeleton("nash", cfg.resolved());
    report["mfg_converged"] = mfg_res.converged;
    report["mfg_final_residual"] =
        mfg_res.residual_history.empty() ? 0.0 : mfg_res.residual_history.back();
    report["deviations"] = table.deviation_names;
    report["eps_is_family_restricted_lower_bound"] = true;
    json levels = json::array();
    std::string csv = "N,groups,eps_hat,ci_lo,ci_hi,upper,null_gap\n";
    for (size_t l = 0; l < table.levels.size(); ++l) {
        const NashLevel& level = table.levels[l];
        json jl;
        jl["N"] = level.N;
        jl["groups"] = level.groups;
        jl["eps_hat"] = level.eps_hat;
        jl["ci_lo"] = level.ci_lo;
        jl["ci_hi"] = level.ci_hi;
        jl["upper"] = uppers[l];
        jl["null_gap"] = level.null_gap;
        jl["best_deviation"] = table.deviation_names[static_cast<size_t>(level.best_index)];
        jl["dev_mean"] = level.dev_mean;
        jl["dev_se"] = level.dev_se;
        levels.push_back(jl);
        csv += std::to_string(level.N) + "," + std::to_string(level.groups) + "," +
               format_double(level.eps_hat) + "," + format_double(level.ci_lo) + "," +
               format_double(level.ci_hi) + "," + format_double(uppers[l]) + "," +
               format_double(level.null_gap) + "\n";
    }
    report["levels"] = levels;
    if (log_n.size() >= 3) {
        const LineFit fit = ols_fit(log_n, log_q);
        report["upper_slope"] = fit.slope;
        report["upper_slope_se"] = fit.slope_se;
        report["upper_slope_95_upper"] = fit.slope + 1.645 * fit.slope_se;
    }
    ensure_directory(out_dir);
    write_text_file(out_dir + "/nash_table.csv", csv);
    mfg_res.policy.write_csv(out_dir + "/policy_com.csv");
    write_report_json(out_dir, report);
    write_meta_json(out_dir, "nash");
    return report;
}

json run_spde_solve(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::vector<std::string> problems;
    CommonSetup s = load_common(cfg, true, &problems);
    const std::string method_name = cfg.get_string("spde.method", "ito");
    const bool milstein = cfg.get_bool("spde.milstein", true);
    SpdeMethod method = SpdeMethod::ito;
    if (method_name == "characteristics")
        method = SpdeMethod::characteristics;
    else if (method_name != "ito")
        problems.push_back("spde.method must be 'ito' or 'characteristics'");
    throw_if_invalid(cfg, {"spde."}, problems);

    const GridMeasure v0 = gaussian_measure(s.grid, s.init_mean, s.init_sd);
    const NoiseBundle noise(s.dt, s.n_steps, 0, s.master_seed, s.seed_offset);
    SpdeOptions options;
    options.milstein = milstein;
    const MeasurePath path =
        solve_spde(s.model, zero_policy(), v0, noise.W_path(), s.dt, method, options);

    double min_density = 0.0, max_mass_err = 0.0, max_neg = 0.0;
    std::string csv = "t,mass,m1,m2,negative_part\n";
    for (size_t n = 0; n < path.slices.size(); ++n) {
        const GridMeasure& m = path.slices[n];
        max_mass_err = std::max(max_mass_err, std::fabs(m.mass() - 1.0));
        max_neg = std::max(max_neg, m.negative_part_mass());
        for (double d : m.density) min_density = std::min(min_density, d);
        csv += format_double(path.times[n]) + "," + format_double(m.mass()) + "," +
               format_double(m.moment(1)) + "," + format_double(m.moment(2)) + "," +
               format_double(m.negative_part_mass()) + "\n";
    }
    json report = report_skeleton("spde-solve", cfg.resolved());
    report["method"] = method_name;
    report["final_mass"] = path.slices.back().mass();
    report["final_m1"] = path.slices.back().moment(1);
    report["final_m2"] = path.slices.back().moment(2);
    report["W_T"] = path.W.back();
    report["max_mass_error"] = max_mass_err;
    report["max_negative_part"] = max_neg;
    report["min_density"] = min_density;
    ensure_directory(out_dir);
    write_text_file(out_dir + "/moments.csv", csv);
    path.slices.back().write_csv(out_dir + "/final_density.csv");
    write_report_json(out_dir, report);
    write_meta_json(out_dir, "spde-solve");
    return report;
}

}  // namespace mfg
