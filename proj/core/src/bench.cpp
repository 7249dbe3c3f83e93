#include "sdc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "sdc/lu.hpp"

namespace sdc {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace

std::vector<SolverChoice> BenchmarkPlan::resolved_configs() const {
    if (!configs.empty()) return configs;
    std::vector<SolverChoice> all;
    for (int i = 0; i < solver_choice_count; ++i) all.push_back(solver_choice_at(i));
    return all;
}

BenchmarkPlan parse_plan_text(const std::string& text) {
    BenchmarkPlan plan;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r\n") != std::string::npos)
                throw std::invalid_argument("plan file: bad line " + std::to_string(lineno));
            continue;
        }
        std::string key = line.substr(0, eq);
        key.erase(std::remove_if(key.begin(), key.end(),
                                 [](unsigned char c) { return std::isspace(c); }),
                  key.end());
        const std::string val = line.substr(eq + 1);
        if (key == "sizes") {
            plan.sizes.clear();
            for (const auto& tok : split_list(val)) plan.sizes.push_back(std::stoi(tok));
        } else if (key == "configs") {
            plan.configs.clear();
            for (const auto& tok : split_list(val))
                plan.configs.push_back(solver_choice_from_name(tok));
        } else if (key == "repetitions") {
            plan.repetitions = std::stoi(val);
        } else if (key == "parallel") {
            plan.parallel_cells = std::stoi(val) != 0;
        } else {
            throw std::invalid_argument("plan file: unknown key '" + key + "'");
        }
    }
    if (plan.sizes.empty()) throw std::invalid_argument("plan file: no sizes");
    if (plan.repetitions < 1) throw std::invalid_argument("plan file: repetitions < 1");
    return plan;
}

BenchmarkPlan parse_plan_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open plan file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_plan_text(ss.str());
}

// ---------------------------------------------------------------------------
// Monolithic path

MonolithicDriver::MonolithicDriver(const ScenarioConfig& cfg, SolverChoice choice)
    : cfg_(cfg), choice_(choice), grid_(build_grid(cfg)) {
    if (!solver_is_monolithic(choice))
        throw std::invalid_argument("MonolithicDriver: not a monolithic configuration");
    v_prev_.assign(grid_.n_vel(), 0.0);
    ordering_ = grid_.banded_ordering();
}

void MonolithicDriver::ensure_reference(const CoupledSystem& sys) {
    if (reference_ready_) return;
    reference_factor_ = lu_factor(permute_symmetric(sys.matrix, ordering_));
    reference_ready_ = true;
}

std::shared_ptr<Preconditioner> MonolithicDriver::build_preconditioner(
    const CoupledSystem& sys) const {
    const int n_v = sys.pv_v.size();
    const int n_pff = sys.pv_pff.size();
    const int n_ppm = sys.pv_ppm.size();
    const int n_ff = sys.td_ff.size();
    const int n = sys.n_total();

    // The porous block is pure-flux coupled in the monolithic system and
    // carries a constant nullspace; its sub-preconditioner is built on a
    // grounded copy.
    auto d_block = ground_dof(
        submatrix(sys.matrix, sys.td_pm.begin, sys.td_pm.end, sys.td_pm.begin, sys.td_pm.end));

    // the two staggered velocity components coarsen separately in the AMG
    std::vector<int> vel_components(n_v, 0);
    for (int k = grid_.ff.n_u(); k < n_v; ++k) vel_components[k] = 1;
    AmgOptions v_amg;
    v_amg.components = vel_components;

    BlockPrecondKind kind;
    std::shared_ptr<Preconditioner> first;
    std::shared_ptr<Preconditioner> pm;
    switch (choice_) {
    case SolverChoice::pv_bj_amg_amg:
    case SolverChoice::pv_bgs_amg_amg: {
        kind = choice_ == SolverChoice::pv_bj_amg_amg ? BlockPrecondKind::pv_bj
                                                      : BlockPrecondKind::pv_bgs;
        auto v_block = submatrix(sys.matrix, 0, n_v, 0, n_v);
        first = std::make_shared<AmgPreconditioner>(v_block, v_amg);
        pm = std::make_shared<AmgPreconditioner>(d_block);
        break;
    }
    case SolverChoice::td_bj_uzawa_amg:
    case SolverChoice::td_bgs_uzawa_amg:
    case SolverChoice::td_bj_uzawa_ilu0:
    case SolverChoice::td_bgs_uzawa_ilu0: {
        const bool bj =
            choice_ == SolverChoice::td_bj_uzawa_amg || choice_ == SolverChoice::td_bj_uzawa_ilu0;
        kind = bj ? BlockPrecondKind::td_bj : BlockPrecondKind::td_bgs;
        auto v_block = submatrix(sys.matrix, 0, n_v, 0, n_v);
        auto b_block = submatrix(sys.matrix, 0, n_v, n_v, n_ff);
        auto c_block = submatrix(sys.matrix, n_v, n_ff, 0, n_v);
        UzawaConfig ucfg;
        ucfg.amg = v_amg;
        first = std::make_shared<UzawaPreconditioner>(v_block, b_block, c_block, ucfg);
        const bool ilu = choice_ == SolverChoice::td_bj_uzawa_ilu0 ||
                         choice_ == SolverChoice::td_bgs_uzawa_ilu0;
        if (ilu)
            pm = std::make_shared<Ilu0Preconditioner>(d_block);
        else
            pm = std::make_shared<AmgPreconditioner>(d_block);
        break;
    }
    default:
        throw std::invalid_argument("build_preconditioner: direct configuration");
    }
    (void)n;
    (void)n_ppm;
    (void)n_pff;
    return std::make_shared<BlockPreconditioner>(kind, sys.matrix, n_v, n_pff, n_ppm, first, pm);
}

MonolithicDriver::StepResult MonolithicDriver::advance(double t) {
    StepResult out;
    const auto t0 = clock_type::now();
    auto sys = assemble_monolithic(grid_, cfg_, v_prev_, t);
    const int n = sys.n_total();

    if (choice_ == SolverChoice::direct) {
        // the factorization cost is the point of the baseline: refactor per step
        auto pa = permute_symmetric(sys.matrix, ordering_);
        auto factor = lu_factor(pa);
        std::vector<double> pb(n);
        for (int k = 0; k < n; ++k) pb[k] = sys.rhs[ordering_[k]];
        auto px = lu_solve(factor, pb);
        out.solution.assign(n, 0.0);
        for (int k = 0; k < n; ++k) out.solution[ordering_[k]] = px[k];
        std::vector<double> r(sys.rhs);
        spmv_add(sys.matrix, out.solution, r, -1.0);
        out.report.final_residual = norm2(r);
        out.report.residual_history = {out.report.final_residual};
        out.report.converged = true;
        out.direct_residual = out.report.final_residual;
        out.aux_memory_doubles = factor.fill_stats.nnz_factors + 2 * n;
        out.wall_seconds = seconds_since(t0);
        v_prev_.assign(out.solution.begin(), out.solution.begin() + grid_.n_vel());
        return out;
    }

    // iterative path: the tolerance reference is bookkeeping and stays
    // outside the timed window; assembly is common to every configuration
    // and stays inside it
    const double assembly_seconds = seconds_since(t0);
    ensure_reference(sys);
    std::vector<double> pb(n);
    for (int k = 0; k < n; ++k) pb[k] = sys.rhs[ordering_[k]];
    auto px = lu_solve(reference_factor_, pb);
    std::vector<double> x_ref(n);
    for (int k = 0; k < n; ++k) x_ref[ordering_[k]] = px[k];
    std::vector<double> r(sys.rhs);
    spmv_add(sys.matrix, x_ref, r, -1.0);
    out.direct_residual = norm2(r);

    const auto t1 = clock_type::now();
    auto precond = build_preconditioner(sys);
    auto op = LinearOperator::from_matrix(sys.matrix);
    auto res = pd_gmres(op, precond.get(), sys.rhs, 10.0 * out.direct_residual, 400,
                        RestartController::defaults());
    out.solution = std::move(res.x);
    out.report = std::move(res.report);
    out.aux_memory_doubles =
        precond->setup_memory_doubles() +
        static_cast<std::int64_t>(RestartController{}.m_max + 5) * n;
    out.wall_seconds = assembly_seconds + seconds_since(t1);
    v_prev_.assign(out.solution.begin(), out.solution.begin() + grid_.n_vel());
    return out;
}

// ---------------------------------------------------------------------------
// Transient harness

TransientResult run_transient(const ScenarioConfig& cfg) {
    cfg.validate();
    TransientResult out;
    const int steps = cfg.n_timesteps();
    const std::string name = solver_choice_name(cfg.solver);

    if (solver_is_monolithic(cfg.solver)) {
        MonolithicDriver driver(cfg, cfg.solver);
        out.total_dof = driver.grid().n_total();
        for (int s = 1; s <= steps; ++s) {
            BenchRecord rec;
            rec.config = name;
            rec.size = cfg.cells_per_unit_square;
            rec.total_dof = out.total_dof;
            rec.timestep = s;
            try {
                auto st = driver.advance(s * cfg.dt);
                rec.wall_seconds = st.wall_seconds;
                rec.outer_iterations = st.report.iterations;
                rec.final_residual = st.report.final_residual;
                rec.direct_residual = st.direct_residual;
                rec.residual_ratio =
                    st.direct_residual > 0.0 ? st.report.final_residual / st.direct_residual
                                             : 0.0;
                rec.aux_memory_doubles = st.aux_memory_doubles;
                rec.converged = st.report.converged;
                out.final_solution = std::move(st.solution);
            } catch (const std::exception&) {
                rec.converged = false;
                out.records.push_back(rec);
                out.completed = false;
                return out;
            }
            const bool ok = rec.converged;
            out.records.push_back(std::move(rec));
            if (!ok) {
                out.completed = false;
                return out;
            }
        }
        return out;
    }

    SubdomainSolvers solvers;
    switch (cfg.solver) {
    case SolverChoice::partitioned_direct:
        break;
    case SolverChoice::partitioned_uzawa_exact_amg:
        solvers.stokes = SubdomainSolvers::Stokes::pd_gmres_uzawa_exact;
        solvers.darcy = SubdomainSolvers::Darcy::bicgstab_amg;
        break;
    case SolverChoice::partitioned_uzawa_amg:
        solvers.stokes = SubdomainSolvers::Stokes::pd_gmres_uzawa_inexact;
        solvers.darcy = SubdomainSolvers::Darcy::bicgstab_amg;
        break;
    default:
        throw std::invalid_argument("run_transient: unhandled configuration");
    }
    CouplingDriver driver(cfg, {}, solvers);
    out.total_dof = driver.grid().n_total();
    for (int s = 1; s <= steps; ++s) {
        BenchRecord rec;
        rec.config = name;
        rec.size = cfg.cells_per_unit_square;
        rec.total_dof = out.total_dof;
        rec.timestep = s;
        try {
            const auto t0 = clock_type::now();
            auto st = driver.coupled_timestep(s * cfg.dt);
            rec.wall_seconds = seconds_since(t0) - st.reference_seconds;
            rec.coupling_iterations = st.coupling_iterations;
            rec.outer_iterations = st.inner_iterations;
            rec.final_residual = st.max_final_residual;
            rec.direct_residual = st.max_direct_residual;
            rec.residual_ratio = st.max_residual_ratio;
            rec.aux_memory_doubles = driver.solver_memory_doubles();
            rec.converged = st.converged;
            out.final_solution = std::move(st.solution);
        } catch (const std::exception&) {
            rec.converged = false;
            out.records.push_back(rec);
            out.completed = false;
            return out;
        }
        const bool ok = rec.converged;
        out.records.push_back(std::move(rec));
        if (!ok) {
            out.completed = false;
            return out;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Plan execution

namespace {

BenchRecord aggregate_cell(const std::vector<TransientResult>& reps, bool contended) {
    BenchRecord agg;
    if (reps.empty() || reps.front().records.empty()) return agg;
    const auto& first = reps.front().records.front();
    agg.config = first.config;
    agg.size = first.size;
    agg.total_dof = first.total_dof;
    agg.timestep = static_cast<int>(reps.front().records.size());
    agg.contended = contended;
    agg.converged = true;

    std::vector<double> walls, outers, couplings;
    for (const auto& rep : reps) {
        for (const auto& rec : rep.records) {
            walls.push_back(rec.wall_seconds);
            outers.push_back(rec.outer_iterations);
            couplings.push_back(rec.coupling_iterations);
            agg.final_residual = std::max(agg.final_residual, rec.final_residual);
            agg.direct_residual = std::max(agg.direct_residual, rec.direct_residual);
            agg.residual_ratio = std::max(agg.residual_ratio, rec.residual_ratio);
            agg.aux_memory_doubles = std::max(agg.aux_memory_doubles, rec.aux_memory_doubles);
            agg.converged = agg.converged && rec.converged;
        }
        agg.converged = agg.converged && rep.completed;
    }
    agg.wall_seconds = median(walls);
    agg.outer_iterations = static_cast<int>(std::llround(median(outers)));
    agg.coupling_iterations = static_cast<int>(std::llround(median(couplings)));
    return agg;
}

void write_runtime_csv(const std::vector<BenchRecord>& rows, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "config,size,total_dof,timesteps,wall_seconds_per_step,outer_iterations,"
         "coupling_iterations,final_residual,direct_residual,residual_ratio,"
         "aux_memory_doubles,converged,contended\n";
    f.precision(12);
    for (const auto& r : rows) {
        f << r.config << ',' << r.size << ',' << r.total_dof << ',' << r.timestep << ','
          << r.wall_seconds << ',' << r.outer_iterations << ',' << r.coupling_iterations << ','
          << r.final_residual << ',' << r.direct_residual << ',' << r.residual_ratio << ','
          << r.aux_memory_doubles << ',' << (r.converged ? 1 : 0) << ','
          << (r.contended ? 1 : 0) << '\n';
    }
}

} // namespace

void write_fillin_csv(const std::vector<int>& sizes, const ScenarioConfig& base,
                      const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "size,total_dof,nnz_matrix,entries_per_dof_matrix,nnz_factors,"
         "entries_per_dof_factors\n";
    f.precision(12);
    for (int size : sizes) {
        ScenarioConfig cfg = base;
        cfg.cells_per_unit_square = size;
        auto grid = build_grid(cfg);
        auto sys = assemble_monolithic(grid, cfg, {}, cfg.dt);
        auto stats = fill_in_report(permute_symmetric(sys.matrix, grid.banded_ordering()));
        f << size << ',' << grid.n_total() << ',' << stats.nnz_matrix << ','
          << stats.entries_per_dof_matrix << ',' << stats.nnz_factors << ','
          << stats.entries_per_dof_factors << '\n';
    }
}

PlanOutput run_plan(const BenchmarkPlan& plan, const ScenarioConfig& base, std::ostream* log) {
    const auto configs = plan.resolved_configs();
    struct Cell {
        int size;
        SolverChoice choice;
    };
    std::vector<Cell> cells;
    for (int size : plan.sizes)
        for (auto choice : configs) cells.push_back({size, choice});

    std::vector<BenchRecord> rows(cells.size());
    std::mutex log_mutex;
    auto run_cell = [&](std::size_t idx) {
        const Cell& cell = cells[idx];
        ScenarioConfig cfg = base;
        cfg.cells_per_unit_square = cell.size;
        cfg.solver = cell.choice;
        std::vector<TransientResult> reps;
        for (int r = 0; r < plan.repetitions; ++r) reps.push_back(run_transient(cfg));
        rows[idx] = aggregate_cell(reps, plan.parallel_cells);
        if (log) {
            std::scoped_lock lock(log_mutex);
            *log << "  " << solver_choice_name(cell.choice) << " size " << cell.size
                 << (rows[idx].converged ? "" : "  [not converged]")
                 << "  wall/step " << rows[idx].wall_seconds << " s\n";
        }
    };

    if (plan.parallel_cells && cells.size() > 1) {
        std::size_t next = 0;
        std::mutex mtx;
        auto worker = [&]() {
            for (;;) {
                std::size_t idx;
                {
                    std::scoped_lock lock(mtx);
                    if (next >= cells.size()) return;
                    idx = next++;
                }
                run_cell(idx);
            }
        };
        const std::size_t n_threads =
            std::min<std::size_t>(cells.size(),
                                  std::max(2u, std::thread::hardware_concurrency()));
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    } else {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    }

    std::filesystem::create_directories(plan.out_dir);
    PlanOutput out;
    out.rows = std::move(rows);
    out.runtime_csv_path = plan.out_dir + "/runtime.csv";
    out.fillin_csv_path = plan.out_dir + "/fillin.csv";
    write_runtime_csv(out.rows, out.runtime_csv_path);
    write_fillin_csv(plan.sizes, base, out.fillin_csv_path);
    return out;
}

// ---------------------------------------------------------------------------
// Verification

VerifyOutcome verify_equivalence(int size, double rel_tol) {
    VerifyOutcome out;
    const std::vector<SolverChoice> set{
        SolverChoice::direct,           SolverChoice::pv_bj_amg_amg,
        SolverChoice::pv_bgs_amg_amg,   SolverChoice::td_bj_uzawa_amg,
        SolverChoice::td_bgs_uzawa_amg, SolverChoice::partitioned_direct,
    };
    std::vector<TransientResult> results;
    for (auto choice : set) {
        ScenarioConfig cfg;
        cfg.cells_per_unit_square = size;
        cfg.solver = choice;
        results.push_back(run_transient(cfg));
        const auto& res = results.back();
        std::ostringstream line;
        line << solver_choice_name(choice) << ": "
             << (res.completed ? "completed" : "FAILED");
        if (!res.completed) out.pass = false;
        // stopping-rule fidelity for the iterative configurations
        if (solver_is_iterative(choice)) {
            double worst = 0.0;
            for (const auto& rec : res.records) worst = std::max(worst, rec.residual_ratio);
            line << ", worst residual ratio " << worst;
            if (worst > 10.0 * (1.0 + 1e-12)) {
                out.pass = false;
                line << "  [exceeds 10x]";
            }
        }
        out.lines.push_back(line.str());
    }

    const auto& ref = results.front().final_solution;
    const double ref_norm = norm2(ref);
    for (std::size_t k = 1; k < set.size(); ++k) {
        if (!results[k].completed || results[k].final_solution.size() != ref.size()) continue;
        double num = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            const double d = results[k].final_solution[i] - ref[i];
            num += d * d;
        }
        const double rel = std::sqrt(num) / ref_norm;
        std::ostringstream line;
        line << solver_choice_name(set[k]) << " vs direct: relative difference " << rel;
        if (!(rel <= rel_tol)) {
            out.pass = false;
            line << "  [exceeds " << rel_tol << "]";
        }
        out.lines.push_back(line.str());
    }
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need matching samples");
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace sdc
