// flexrec command-line front end. Exit codes: 0 success, 1 usage,
// 2 invalid input, 3 solver failure; errors go to stderr as JSON.

#include "flexrec/io/json.hpp"
#include "flexrec/io/newsvendor.hpp"
#include "flexrec/io/svg.hpp"
#include "flexrec/service/decision_service.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace flexrec;

namespace {

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Failure
{
    int exit_code;
    Json error;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot write '" + path + "'");
    out << text;
}

RatVector parse_vector(const std::string& text, const std::string& option)
{
    RatVector v;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            v.push_back(Rational::parse(cell));
        } catch (const std::invalid_argument& e) {
            throw UsageError(option + ": " + e.what());
        }
    }
    if (v.empty())
        throw UsageError(option + ": expected comma-separated rationals");
    return v;
}

std::string label(const RatVector& x)
{
    std::string s = "F(";
    for (std::size_t i = 0; i < x.size(); ++i)
        s += (i ? "," : "") + x[i].str();
    return s + ")";
}

Json error_json(const std::string& code, const std::string& message, const std::string& path = "")
{
    return {{"code", code}, {"message", message}, {"path", path}};
}

/** Runs an action and maps exceptions to exit codes. */
int run(const std::function<void()>& action)
{
    std::optional<Failure> f;
    try {
        action();
        return 0;
    } catch (const UsageError& e) {
        f = Failure{1, error_json("usage", e.what())};
    } catch (const ProblemFormatError& e) {
        f = Failure{2, error_json("invalid_problem", e.message(), e.path())};
    } catch (const ProblemValidationError& e) {
        Json j = error_json("validation_failed", e.what());
        j["failures"] = e.failures();
        f = Failure{2, j};
    } catch (const NewsvendorFormatError& e) {
        f = Failure{2, error_json("invalid_newsvendor_data", e.what())};
    } catch (const DimensionError& e) {
        f = Failure{2, error_json("dimension_mismatch", e.what())};
    } catch (const PreconditionError& e) {
        f = Failure{2, error_json("precondition", e.what())};
    } catch (const BudgetExhausted& e) {
        Json j = error_json(e.code(), e.what());
        j["partial"] = to_json(e.partial());
        f = Failure{3, j};
    } catch (const SolverError& e) {
        f = Failure{3, error_json(e.code(), e.what())};
    } catch (const LinealityError& e) {
        f = Failure{3, error_json("lineality", e.what())};
    } catch (const std::exception& e) {
        f = Failure{3, error_json("internal", e.what())};
    }
    std::cerr << f->error.dump() << "\n";
    return f->exit_code;
}

/**
 * Joins "--x -1,2" into "--x=-1,2" so that negative values are not taken for
 * options.
 */
std::vector<std::string> join_vector_options(int argc, char** argv)
{
    std::vector<std::string> args(argv, argv + argc);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if ((args[i] == "--x" || args[i] == "--v") && i + 1 < args.size()) {
            out.push_back(args[i] + "=" + args[i + 1]);
            ++i;
        } else {
            out.push_back(args[i]);
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact multi-objective two-stage recourse problems"};
    app.require_subcommand(1);
    app.fallthrough();
    bool pretty = false;
    std::uint64_t seed = 0;
    app.add_flag("--pretty", pretty, "Indent JSON output");
    app.add_option("--seed", seed, "Seed for random scenario draws in service sessions");

    std::function<void()> action;
    auto emit = [&](const Json& j) { std::cout << j.dump(pretty ? 2 : -1) << "\n"; };
    auto load = [&](const std::string& file) { return parse_problem(read_file(file)); };

    std::string file, svg, x_text, v_text;
    std::vector<std::string> xs_text;
    std::size_t budget = SetSolveOptions{}.improvement_budget;

    auto* solve = app.add_subcommand("solve", "Solve the set-optimization problem; prints the solution");
    solve->add_option("file", file, "Problem document")->required();
    solve->add_option("--svg", svg, "Also plot the upper image and each F(x) (two objectives only)");
    solve->add_option("--budget", budget, "Improvement steps allowed per vertex");
    solve->callback([&] {
        action = [&] {
            RecourseProblem rp = load(file);
            SetSolution sol = solve_set_problem(rp, SetSolveOptions{budget});
            if (!svg.empty()) {
                std::vector<std::pair<std::string, UpperSet>> sets{{"upper image", sol.upper_image}};
                for (const auto& e : sol.entries)
                    sets.emplace_back(label(e.x), e.F);
                write_file(svg, export_svg(sets));
            }
            emit(to_json(sol, rp.d() == 2));
        };
    });

    auto* ws = app.add_subcommand("ws", "Wait-and-see upper images, per scenario and combined");
    ws->add_option("file", file, "Problem document")->required();
    ws->add_option("--svg", svg, "Also plot the combined and the recourse upper image");
    ws->callback([&] {
        action = [&] {
            RecourseProblem rp = load(file);
            WsDecomposition w = wait_and_see(rp);
            if (!svg.empty())
                write_file(svg, export_svg({{"wait-and-see", w.combined}, {"recourse", recourse_upper_image(rp).set}}));
            emit(to_json(rp, w));
        };
    });

    auto* ev = app.add_subcommand("ev", "Expected value problem and its upper image");
    ev->add_option("file", file, "Problem document")->required();
    ev->callback([&] {
        action = [&] {
            RecourseProblem rp = load(file);
            emit({{"problem", to_json(expected_value_recourse(rp))},
                  {"upper_image", to_json(upper_image(expected_value_problem(rp)))}});
        };
    });

    auto* ev_star = app.add_subcommand("ev-star", "Set-optimization solution of the expected value problem");
    ev_star->add_option("file", file, "Problem document")->required();
    ev_star->callback([&] {
        action = [&] {
            RecourseProblem rp = load(file);
            emit(to_json(solve_ev_star(rp, SetSolveOptions{budget}), rp.d() == 2));
        };
    });

    auto* eev = app.add_subcommand("eev", "Outcomes of the recourse problem with the first stage fixed");
    eev->add_option("file", file, "Problem document")->required();
    eev->add_option("--x", x_text, "First-stage decision, e.g. 0,200")->required();
    eev->callback([&] {
        action = [&] {
            RecourseProblem rp = load(file);
            RatVector x = parse_vector(x_text, "--x");
            emit(to_json(x, eev_upper_image(rp, x)));
        };
    });

    auto* evpi_cmd = app.add_subcommand("evpi", "Improvements of an outcome under perfect information");
    evpi_cmd->add_option("file", file, "Problem document")->required();
    evpi_cmd->add_option("--v", v_text, "Outcome in the upper image, e.g. -250,100")->required();
    evpi_cmd->callback([&] {
        action = [&] {
            RecourseProblem rp = load(file);
            emit(to_json(evpi(rp, parse_vector(v_text, "--v"))));
        };
    });

    auto* report = app.add_subcommand("report", "Inclusions between the upper image and its surrogates");
    report->add_option("file", file, "Problem document")->required();
    report->add_option("--x", xs_text, "EEV decisions (default: the expected value solution)");
    report->callback([&] {
        action = [&] {
            RecourseProblem rp = load(file);
            std::optional<std::vector<RatVector>> xs;
            if (!xs_text.empty()) {
                xs.emplace();
                for (const auto& t : xs_text)
                    xs->push_back(parse_vector(t, "--x"));
            }
            emit(to_json(inclusion_report(rp, std::nullopt, xs)));
        };
    });

    auto* check = app.add_subcommand("validate", "Check a family of first-stage decisions as a solution");
    check->add_option("file", file, "Problem document")->required();
    check->add_option("--x", xs_text, "First-stage decision (repeatable)")->required();
    check->callback([&] {
        action = [&] {
            RecourseProblem rp = load(file);
            std::vector<RatVector> xs;
            for (const auto& t : xs_text)
                xs.push_back(parse_vector(t, "--x"));
            emit(to_json(validate_set_solution(rp, xs)));
        };
    });

    std::string prices, demand, out, time_csv;
    std::string capacity;
    bool demand_cap = false;
    auto* nv = app.add_subcommand("newsvendor", "Build a newsvendor problem document");
    nv->add_option("--prices", prices, "Prices JSON")->required();
    nv->add_option("--demand", demand, "Demand CSV")->required();
    nv->add_option("--capacity", capacity, "Transport capacity")->required();
    nv->add_option("--out", out, "Output file (default: stdout)");
    nv->add_option("--time", time_csv, "Working minutes per copy, same layout as the demand CSV");
    nv->add_flag("--demand-cap", demand_cap, "Also bound sales by the demand");
    nv->callback([&] {
        action = [&] {
            NewsvendorSpec spec;
            spec.types = parse_prices_json(read_file(prices));
            spec.demand = parse_demand_csv(read_file(demand));
            try {
                spec.capacity = Rational::parse(capacity);
            } catch (const std::invalid_argument& e) {
                throw UsageError(std::string("--capacity: ") + e.what());
            }
            if (!time_csv.empty()) {
                DemandTable t = parse_demand_csv(read_file(time_csv));
                if (t.types != spec.demand.types || t.days != spec.demand.days)
                    throw NewsvendorFormatError("time table must have the demand table's days and types");
                spec.time = t.demand;
            }
            spec.demand_cap = demand_cap;
            for (const auto& w : newsvendor_warnings(spec))
                std::cerr << "warning: " << w << "\n";
            RecourseProblem rp = build_newsvendor(spec);
            auto rep = validate(rp);
            if (!rep.ok())
                throw ProblemValidationError(rep.failures);
            if (out.empty())
                std::cout << serialize(rp);
            else
                write_file(out, serialize(rp));
        };
    });

    int port = 8080;
    std::string host = "127.0.0.1", state_dir;
    auto* serve = app.add_subcommand("serve", "Run the HTTP decision service");
    serve->add_option("--port", port, "Port");
    serve->add_option("--host", host, "Address to bind");
    serve->add_option("--state-dir", state_dir, "Directory for write-through copies of problems and sessions");
    serve->callback([&] {
        action = [&] {
            service::ServiceOptions opt;
            opt.seed = seed;
            if (!state_dir.empty())
                opt.state_dir = state_dir;
            service::DecisionService svc(opt);
            httplib::Server server;
            svc.mount(server);
            std::cerr << "listening on http://" << host << ":" << port << "\n";
            if (!server.listen(host, port))
                throw UsageError("cannot listen on " + host + ":" + std::to_string(port));
        };
    });

    auto* openapi = app.add_subcommand("openapi", "Print the service's endpoint list");
    openapi->callback([&] { action = [&] { std::cout << service::openapi_document().dump(2) << "\n"; }; });

    std::vector<std::string> args = join_vector_options(argc, argv);
    std::vector<const char*> cargs;
    for (const auto& a : args)
        cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << error_json("usage", e.what()).dump() << "\n";
        return 1;
    }
    return run(action);
}
