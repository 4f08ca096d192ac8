#pragma once
// HTTP JSON API over the solvers: problem analyses (computed once, in the
// background) and two-stage decision sessions. DecisionService::handle is the
// transport-free core; mount() wires it into a cpp-httplib server.

#include "flexrec/io/json.hpp"
#include "flexrec/io/newsvendor.hpp"

#include <httplib.h>

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace flexrec::service {

struct Response
{
    int status = 200;
    std::string body;
};

/** Error surfaced to the client as {code, message, path}. */
class ApiError : public std::runtime_error
{
public:
    ApiError(int status, std::string code, const std::string& message, std::string path = "")
        : std::runtime_error(message), status_(status), code_(std::move(code)), path_(std::move(path))
    {}
    int status() const { return status_; }
    const std::string& code() const { return code_; }
    const std::string& path() const { return path_; }

private:
    int status_;
    std::string code_;
    std::string path_;
};

inline std::string error_body(const std::string& code, const std::string& message, const std::string& path)
{
    return Json{{"code", code}, {"message", message}, {"path", path}}.dump();
}

/** Static endpoint list; also shipped as docs/openapi.json. */
inline Json openapi_document()
{
    auto op = [](const char* summary, const char* request, const char* response) {
        Json j{{"summary", summary}, {"responses", {{"200", {{"description", response}}}}}};
        if (*request)
            j["requestBody"] = {{"description", request}};
        return j;
    };
    Json paths;
    paths["/api/problems"]["post"] = op("Register a problem document; validated", "ProblemDocument", "{id}");
    paths["/api/newsvendor"]["post"] =
        op("Build and register a newsvendor problem", "{prices, demand_csv, capacity, demand_cap}", "{id}");
    paths["/api/problems/{id}"]["get"] = op("The problem document", "", "ProblemDocument");
    paths["/api/problems/{id}/status"]["get"] = op("State of each background analysis", "", "{analyses}");
    paths["/api/problems/{id}/upper-image"]["get"] =
        op("Upper image of the recourse problem; 202 while computing", "", "UpperSet with gain_vertices");
    paths["/api/problems/{id}/solution"]["get"] =
        op("Set-optimization solution with F polygons and certificates; 202 while computing", "", "SetSolution");
    paths["/api/problems/{id}/surrogates"]["get"] =
        op("Wait-and-see decomposition, expected value upper image, inclusion report; 202 while computing", "",
           "{ws, ev, report}");
    paths["/api/problems/{id}/f"]["post"] = op("Flexibility set F(x)", "{x}", "UpperSet or {empty: true}");
    paths["/api/problems/{id}/evpi"]["post"] =
        op("Perfect-information improvements of an outcome v; 404 if v is outside the upper image", "{v}",
           "EvpiRegion");
    paths["/api/problems/{id}/sessions"]["post"] = op("Start a decision session", "{seed?}", "DecisionSession");
    paths["/api/sessions/{id}"]["get"] = op("Session state", "", "DecisionSession");
    paths["/api/sessions/{id}/first-stage"]["post"] = op("Commit the first-stage decision", "{x}", "DecisionSession");
    paths["/api/sessions/{id}/realize"]["post"] =
        op("Realize a scenario, forced or drawn with the session seed", "{omega} or {random: true}",
           "DecisionSession");
    paths["/api/sessions/{id}/second-stage"]["get"] =
        op("Second-stage upper image for the realized scenario, with witnesses y", "", "UpperImage");
    paths["/api/sessions/{id}/choose"]["post"] =
        op("Choose the second-stage decision; returns the outcome C x + Q y", "{y}", "DecisionSession");
    Json error{{"type", "object"}};
    for (const char* key : {"code", "message", "path"})
        error["properties"][key] = {{"type", "string"}};
    Json doc{{"openapi", "3.0.3"}, {"info", {{"title", "flexrec decision service"}, {"version", "0.1.0"}}}};
    doc["paths"] = paths;
    doc["components"]["schemas"]["Error"] = error;
    return doc;
}

enum class Stage { AwaitFirstStage, AwaitRealization, AwaitSecondStage, Done };

inline const char* to_string(Stage s)
{
    switch (s) {
    case Stage::AwaitFirstStage: return "AwaitFirstStage";
    case Stage::AwaitRealization: return "AwaitRealization";
    case Stage::AwaitSecondStage: return "AwaitSecondStage";
    case Stage::Done: return "Done";
    }
    return "?";
}

inline Stage stage_from_string(const std::string& s)
{
    for (Stage st : {Stage::AwaitFirstStage, Stage::AwaitRealization, Stage::AwaitSecondStage, Stage::Done})
        if (s == to_string(st))
            return st;
    throw std::invalid_argument("unknown stage '" + s + "'");
}

struct DecisionSession
{
    std::string id;
    std::string problem;
    Stage stage = Stage::AwaitFirstStage;
    std::uint64_t seed = 0;
    std::uint64_t draws = 0; ///< random realizations drawn so far
    std::optional<RatVector> x;
    std::optional<std::string> omega;
    std::optional<RatVector> y;
    std::optional<RatVector> outcome;
};

inline Json to_json(const DecisionSession& s)
{
    auto opt = [](const std::optional<RatVector>& v) { return v ? flexrec::to_json(*v) : Json(nullptr); };
    return {{"id", s.id},
            {"problem", s.problem},
            {"stage", to_string(s.stage)},
            {"seed", s.seed},
            {"draws", s.draws},
            {"x", opt(s.x)},
            {"omega", s.omega ? Json(*s.omega) : Json(nullptr)},
            {"y", opt(s.y)},
            {"outcome", opt(s.outcome)}};
}

inline DecisionSession session_from_json(const Json& j)
{
    auto opt = [](const Json& v, const char* key) -> std::optional<RatVector> {
        if (v.at(key).is_null())
            return std::nullopt;
        return vector_from_json(v.at(key), std::string("/") + key);
    };
    DecisionSession s;
    s.id = j.at("id").get<std::string>();
    s.problem = j.at("problem").get<std::string>();
    s.stage = stage_from_string(j.at("stage").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.draws = j.at("draws").get<std::uint64_t>();
    s.x = opt(j, "x");
    if (!j.at("omega").is_null())
        s.omega = j.at("omega").get<std::string>();
    s.y = opt(j, "y");
    s.outcome = opt(j, "outcome");
    return s;
}

/**
 * Scenario index drawn exactly with probabilities p: a uniform integer below
 * the common denominator, located among the cumulative numerators.
 */
inline std::size_t draw_scenario(const RecourseProblem& rp, std::uint64_t seed, std::uint64_t draw)
{
    mpz_class L = 1;
    for (const auto& s : rp.scenarios)
        mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), s.p.denominator().get_mpz_t());
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32)};
    std::mt19937_64 rng(seq);
    gmp_randclass gen(gmp_randinit_default);
    gen.seed(mpz_class(std::to_string(rng())));
    mpz_class r = gen.get_z_range(L);
    mpz_class acc = 0;
    for (std::size_t i = 0; i < rp.N(); ++i) {
        acc += rp.scenarios[i].p.numerator() * (L / rp.scenarios[i].p.denominator());
        if (r < acc)
            return i;
    }
    return rp.N() - 1;
}

struct ServiceOptions
{
    std::uint64_t seed = 0;               ///< base of the default session seeds
    std::optional<std::string> state_dir; ///< write-through copies of problems and sessions
};

class DecisionService
{
public:
    explicit DecisionService(ServiceOptions options = {}) : options_(std::move(options)) { load_state(); }

    ~DecisionService()
    {
        std::vector<std::thread> workers;
        {
            std::lock_guard lock(mutex_);
            workers.swap(workers_);
        }
        for (auto& t : workers)
            t.join();
    }

    DecisionService(const DecisionService&) = delete;
    DecisionService& operator=(const DecisionService&) = delete;

    /** Routes one request. The query holds decoded parameters (only "wait" is used). */
    Response handle(const std::string& method, const std::string& path, const std::string& body,
                    const std::map<std::string, std::string>& query = {})
    {
        try {
            return route(method, split(path), body, query.count("wait") && query.at("wait") != "0" &&
                                                        query.at("wait") != "false");
        } catch (const ApiError& e) {
            return {e.status(), error_body(e.code(), e.what(), e.path())};
        } catch (const ProblemFormatError& e) {
            return {422, error_body("invalid_problem", e.message(), e.path())};
        } catch (const ProblemValidationError& e) {
            return {422, error_body("validation_failed", e.what(), "")};
        } catch (const NewsvendorFormatError& e) {
            return {422, error_body("invalid_newsvendor_data", e.what(), "")};
        } catch (const DimensionError& e) {
            return {422, error_body("dimension_mismatch", e.what(), "")};
        } catch (const PreconditionError& e) {
            return {422, error_body("precondition", e.what(), "")};
        } catch (const SolverError& e) {
            return {422, error_body(e.code(), e.what(), "")};
        } catch (const std::exception& e) {
            return {500, error_body("internal", e.what(), "")};
        }
    }

    /** Registers the API and CORS headers on an httplib server. */
    void mount(httplib::Server& server)
    {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                    {"Access-Control-Allow-Headers", "Content-Type"}});
        auto adapter = [this](const httplib::Request& req, httplib::Response& res) {
            std::map<std::string, std::string> query;
            for (const auto& [k, v] : req.params)
                query[k] = v;
            Response r = handle(req.method, req.path, req.body, query);
            res.status = r.status;
            res.set_content(r.body, "application/json");
        };
        server.Get(".*", adapter);
        server.Post(".*", adapter);
        server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    }

private:
    enum class State { Idle, Running, Ready, Failed };

    struct Analysis
    {
        State state = State::Idle;
        Response result;
        std::chrono::steady_clock::time_point started;
    };

    template <class T>
    struct Memo
    {
        std::mutex m;
        std::optional<T> value;
        template <class F>
        const T& get(F&& compute)
        {
            std::lock_guard lock(m);
            if (!value)
                value.emplace(compute());
            return *value;
        }
    };

    struct ProblemHandle
    {
        std::string id;
        RecourseProblem problem;
        std::string document;

        std::mutex m; ///< guards analyses and cv waits
        std::condition_variable cv;
        std::map<std::string, Analysis> analyses;

        Memo<UpperImage> image;
        Memo<SetSolution> solution;
        Memo<WsDecomposition> ws;
        std::mutex f_mutex;
        std::unique_ptr<FlexCache> f_cache;
    };

    struct SessionSlot
    {
        std::mutex m;
        DecisionSession s;
    };

    ServiceOptions options_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<ProblemHandle>> problems_;
    std::map<std::string, std::shared_ptr<SessionSlot>> sessions_;
    std::uint64_t next_problem_ = 1, next_session_ = 1;
    std::vector<std::thread> workers_;

    static std::vector<std::string> split(const std::string& path)
    {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : path) {
            if (c == '/') {
                if (!cur.empty())
                    parts.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty())
            parts.push_back(cur);
        return parts;
    }

    static Json parse_body(const std::string& body)
    {
        try {
            return Json::parse(body.empty() ? "{}" : body);
        } catch (const Json::parse_error& e) {
            throw ApiError(400, "malformed_json", e.what());
        }
    }

    static RatVector body_vector(const Json& body, const std::string& key)
    {
        if (!body.is_object() || !body.contains(key))
            throw ApiError(400, "missing_field", "missing field '" + key + "'", "/" + key);
        try {
            return vector_from_json(body[key], "/" + key);
        } catch (const ProblemFormatError& e) {
            throw ApiError(400, "malformed_field", e.message(), e.path());
        }
    }

    static Response ok(const Json& j, int status = 200) { return {status, j.dump()}; }

    std::shared_ptr<ProblemHandle> problem(const std::string& id)
    {
        std::lock_guard lock(mutex_);
        auto it = problems_.find(id);
        if (it == problems_.end())
            throw ApiError(404, "not_found", "unknown problem '" + id + "'");
        return it->second;
    }

    std::shared_ptr<SessionSlot> session(const std::string& id)
    {
        std::lock_guard lock(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end())
            throw ApiError(404, "not_found", "unknown session '" + id + "'");
        return it->second;
    }

    Response route(const std::string& method, const std::vector<std::string>& p, const std::string& body, bool wait)
    {
        if (p.empty() || p[0] != "api")
            throw ApiError(404, "not_found", "no such endpoint");
        const bool get = method == "GET", post = method == "POST";
        if (p.size() == 2 && p[1] == "openapi.json" && get)
            return ok(openapi_document());
        if (p.size() == 2 && p[1] == "problems" && post)
            return add_problem(validated(problem_from_json(parse_body(body))));
        if (p.size() == 2 && p[1] == "newsvendor" && post)
            return add_newsvendor(parse_body(body));
        if (p.size() >= 3 && p[1] == "problems") {
            auto h = problem(p[2]);
            if (p.size() == 3 && get)
                return {200, h->document};
            const std::string& what = p.size() == 4 ? p[3] : "";
            if (get && what == "status")
                return status(*h);
            if (get && (what == "upper-image" || what == "solution" || what == "surrogates"))
                return analysis(h, what, wait);
            if (post && what == "f")
                return flexibility(*h, parse_body(body));
            if (post && what == "evpi")
                return evpi_region(*h, parse_body(body));
            if (post && what == "sessions")
                return new_session(*h, parse_body(body));
        }
        if (p.size() >= 3 && p[1] == "sessions") {
            auto slot = session(p[2]);
            std::lock_guard lock(slot->m);
            const std::string& what = p.size() == 4 ? p[3] : "";
            if (p.size() == 3 && get)
                return ok(to_json(slot->s));
            if (post && what == "first-stage")
                return first_stage(slot->s, parse_body(body));
            if (post && what == "realize")
                return realize(slot->s, parse_body(body));
            if (get && what == "second-stage")
                return second_stage(slot->s);
            if (post && what == "choose")
                return choose(slot->s, parse_body(body));
        }
        throw ApiError(404, "not_found", "no such endpoint");
    }

    // ---- problems ----

    static RecourseProblem validated(RecourseProblem rp)
    {
        auto report = validate(rp);
        if (!report.ok())
            throw ProblemValidationError(report.failures);
        return rp;
    }

    Response add_problem(RecourseProblem rp)
    {
        auto h = std::make_shared<ProblemHandle>();
        h->problem = std::move(rp);
        h->document = to_json(h->problem).dump();
        h->f_cache = std::make_unique<FlexCache>(h->problem);
        {
            std::lock_guard lock(mutex_);
            h->id = "p" + std::to_string(next_problem_++);
            problems_[h->id] = h;
        }
        persist("problems", h->id, h->document);
        return ok({{"id", h->id}}, 201);
    }

    Response add_newsvendor(const Json& body)
    {
        for (const char* key : {"prices", "demand_csv", "capacity"})
            if (!body.contains(key))
                throw ApiError(400, "missing_field", std::string("missing field '") + key + "'", std::string("/") + key);
        NewsvendorSpec spec;
        spec.types = parse_prices_json(body["prices"].dump());
        if (!body["demand_csv"].is_string())
            throw ApiError(400, "malformed_field", "demand_csv must be a string", "/demand_csv");
        spec.demand = parse_demand_csv(body["demand_csv"].get<std::string>());
        spec.capacity = detail::rational_from_json(body["capacity"], "/capacity");
        spec.demand_cap = body.value("demand_cap", false);
        return add_problem(validated(build_newsvendor(spec)));
    }

    Response status(ProblemHandle& h)
    {
        std::lock_guard lock(h.m);
        Json a = Json::object();
        for (const char* key : {"upper-image", "solution", "surrogates"}) {
            auto it = h.analyses.find(key);
            State s = it == h.analyses.end() ? State::Idle : it->second.state;
            a[key] = s == State::Idle ? "idle" : s == State::Running ? "running" : s == State::Ready ? "ready" : "failed";
        }
        return ok({{"id", h.id}, {"analyses", a}});
    }

    Response compute(ProblemHandle& h, const std::string& what)
    {
        try {
            const RecourseProblem& rp = h.problem;
            if (what == "upper-image")
                return ok(flexrec::to_json(h.image.get([&] { return recourse_upper_image(rp); }), true));
            if (what == "solution")
                return ok(flexrec::to_json(h.solution.get([&] { return solve_set_problem(rp); }), true));
            const WsDecomposition& ws = h.ws.get([&] { return wait_and_see(rp); });
            Json j{{"ws", flexrec::to_json(rp, ws)},
                   {"ev", flexrec::to_json(upper_image(expected_value_problem(rp)), true)},
                   {"report", flexrec::to_json(inclusion_report(rp))}};
            return ok(j);
        } catch (const SolverError& e) {
            return {422, error_body(e.code(), e.what(), "")};
        } catch (const std::exception& e) {
            return {500, error_body("internal", e.what(), "")};
        }
    }

    /** Serves a memoized analysis; starts it in the background on first request. */
    Response analysis(const std::shared_ptr<ProblemHandle>& h, const std::string& what, bool wait)
    {
        std::unique_lock lock(h->m);
        Analysis& a = h->analyses[what];
        if (a.state == State::Idle) {
            a.state = State::Running;
            a.started = std::chrono::steady_clock::now();
            std::lock_guard wl(mutex_);
            workers_.emplace_back([h, what, this] {
                Response r = compute(*h, what);
                std::lock_guard l(h->m);
                Analysis& done = h->analyses[what];
                done.result = std::move(r);
                done.state = done.result.status == 200 ? State::Ready : State::Failed;
                h->cv.notify_all();
            });
        }
        if (wait)
            h->cv.wait(lock, [&] { return a.state == State::Ready || a.state == State::Failed; });
        if (a.state == State::Running) {
            auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - a.started);
            return ok({{"status", "running"}, {"analysis", what}, {"elapsed_ms", ms.count()}}, 202);
        }
        return a.result;
    }

    Response flexibility(ProblemHandle& h, const Json& body)
    {
        RatVector x = body_vector(body, "x");
        if (x.size() != h.problem.n())
            throw ApiError(422, "dimension_mismatch",
                           "x has length " + std::to_string(x.size()) + ", expected " + std::to_string(h.problem.n()),
                           "/x");
        std::lock_guard lock(h.f_mutex);
        const UpperSet& F = h.f_cache->get(x);
        if (F.is_empty())
            return ok({{"x", flexrec::to_json(x)}, {"empty", true}});
        Json j{{"x", flexrec::to_json(x)}, {"empty", false}, {"F", flexrec::to_json(F, true)}};
        return ok(j);
    }

    Response evpi_region(ProblemHandle& h, const Json& body)
    {
        RatVector v = body_vector(body, "v");
        if (v.size() != h.problem.d())
            throw ApiError(422, "dimension_mismatch",
                           "v has length " + std::to_string(v.size()) + ", expected " + std::to_string(h.problem.d()),
                           "/v");
        const UpperImage& img = h.image.get([&] { return recourse_upper_image(h.problem); });
        if (!contains_point(img.set, v))
            throw ApiError(404, "not_in_upper_image", "decision not in upper image", "/v");
        const WsDecomposition& ws = h.ws.get([&] { return wait_and_see(h.problem); });
        return ok(flexrec::to_json(evpi(img.set, ws.combined, v)));
    }

    // ---- sessions ----

    Response new_session(ProblemHandle& h, const Json& body)
    {
        auto slot = std::make_shared<SessionSlot>();
        slot->s.problem = h.id;
        if (body.contains("seed") && !body["seed"].is_number_unsigned())
            throw ApiError(400, "malformed_field", "seed must be a nonnegative integer", "/seed");
        {
            std::lock_guard lock(mutex_);
            const std::uint64_t n = next_session_++;
            slot->s.id = "s" + std::to_string(n);
            // without an explicit seed, sessions of a seeded service differ but replay identically
            slot->s.seed = body.contains("seed") ? body["seed"].get<std::uint64_t>() : options_.seed * 1000003 + n;
            sessions_[slot->s.id] = slot;
        }
        save(slot->s);
        return ok(to_json(slot->s), 201);
    }

    static void require_stage(const DecisionSession& s, Stage expected)
    {
        if (s.stage != expected)
            throw ApiError(409, "wrong_stage",
                           std::string("session is in stage ") + to_string(s.stage) + ", expected " + to_string(expected));
    }

    Response first_stage(DecisionSession& s, const Json& body)
    {
        require_stage(s, Stage::AwaitFirstStage);
        auto h = problem(s.problem);
        const RecourseProblem& rp = h->problem;
        RatVector x = body_vector(body, "x");
        if (x.size() != rp.n())
            throw ApiError(422, "dimension_mismatch",
                           "x has length " + std::to_string(x.size()) + ", expected " + std::to_string(rp.n()), "/x");
        for (std::size_t j = 0; j < x.size(); ++j)
            if (x[j].sign() < 0)
                throw ApiError(422, "infeasible", "x must be nonnegative", "/x/" + std::to_string(j));
        for (std::size_t i = 0; i < rp.k(); ++i)
            if (!satisfies(dot(rp.A.row(i), x), rp.first_stage_senses[i], rp.b[i]))
                throw ApiError(422, "infeasible",
                               "first-stage constraint " + std::to_string(i + 1) + " violated: " +
                                   dot(rp.A.row(i), x).str() + " " + flexrec::to_string(rp.first_stage_senses[i]) +
                                   " " + rp.b[i].str() + " fails",
                               "/x");
        {
            std::lock_guard lock(h->f_mutex);
            if (h->f_cache->get(x).is_empty())
                throw ApiError(422, "infeasible", "some scenario has no feasible second-stage decision for this x",
                               "/x");
        }
        s.x = std::move(x);
        s.stage = Stage::AwaitRealization;
        save(s);
        return ok(to_json(s));
    }

    Response realize(DecisionSession& s, const Json& body)
    {
        require_stage(s, Stage::AwaitRealization);
        const RecourseProblem& rp = problem(s.problem)->problem;
        if (body.contains("omega")) {
            if (!body["omega"].is_string())
                throw ApiError(400, "malformed_field", "omega must be a scenario label", "/omega");
            const std::string label = body["omega"].get<std::string>();
            try {
                rp.scenario_index(label);
            } catch (const PreconditionError& e) {
                throw ApiError(422, "unknown_scenario", e.what(), "/omega");
            }
            s.omega = label;
        } else if (body.value("random", false)) {
            s.omega = rp.scenarios[draw_scenario(rp, s.seed, s.draws++)].label;
        } else {
            throw ApiError(400, "missing_field", "expected {\"omega\": label} or {\"random\": true}", "");
        }
        s.stage = Stage::AwaitSecondStage;
        save(s);
        return ok(to_json(s));
    }

    Response second_stage(DecisionSession& s)
    {
        if (s.stage != Stage::AwaitSecondStage && s.stage != Stage::Done)
            require_stage(s, Stage::AwaitSecondStage);
        const RecourseProblem& rp = problem(s.problem)->problem;
        UpperImage img = second_stage_image(rp, *s.x, rp.scenario_index(*s.omega));
        Json j = flexrec::to_json(img, true);
        j["omega"] = *s.omega;
        j["x"] = flexrec::to_json(*s.x);
        return ok(j);
    }

    Response choose(DecisionSession& s, const Json& body)
    {
        require_stage(s, Stage::AwaitSecondStage);
        const RecourseProblem& rp = problem(s.problem)->problem;
        RatVector y = body_vector(body, "y");
        if (y.size() != rp.m())
            throw ApiError(422, "dimension_mismatch",
                           "y has length " + std::to_string(y.size()) + ", expected " + std::to_string(rp.m()), "/y");
        for (std::size_t j = 0; j < y.size(); ++j)
            if (y[j].sign() < 0)
                throw ApiError(422, "infeasible", "y must be nonnegative", "/y/" + std::to_string(j));
        const std::size_t idx = rp.scenario_index(*s.omega);
        const Scenario& sc = rp.scenarios[idx];
        for (std::size_t r = 0; r < rp.l(); ++r) {
            Rational lhs = dot(sc.T.row(r), *s.x) + dot(sc.W.row(r), y);
            if (satisfies(lhs, sc.senses[r], sc.u[r]))
                continue;
            throw ApiError(422, "infeasible", linking_row(sc, r) ? "y exceeds x" : "second-stage constraint " +
                                                                                     std::to_string(r + 1) + " violated",
                           "/y");
        }
        RatVector outcome = rp.C * *s.x + sc.Q * y;
        if (!contains_point(second_stage_image(rp, *s.x, idx).set, outcome))
            throw SolverError("internal", "outcome outside the second-stage upper image");
        s.y = std::move(y);
        s.outcome = std::move(outcome);
        s.stage = Stage::Done;
        save(s);
        return ok(to_json(s));
    }

    /** Row of the form y_j - x_i <= 0. */
    static bool linking_row(const Scenario& sc, std::size_t r)
    {
        if (sc.senses[r] != Sense::Le || !sc.u[r].is_zero())
            return false;
        int w = 0, t = 0;
        for (const auto& v : sc.W.row(r))
            w += v == 1 ? 1 : v.is_zero() ? 0 : 100;
        for (const auto& v : sc.T.row(r))
            t += v == -1 ? 1 : v.is_zero() ? 0 : 100;
        return w == 1 && t == 1;
    }

    // ---- persistence ----

    void persist(const std::string& kind, const std::string& id, const std::string& text)
    {
        if (!options_.state_dir)
            return;
        std::filesystem::path dir = std::filesystem::path(*options_.state_dir) / kind;
        std::filesystem::create_directories(dir);
        std::ofstream(dir / (id + ".json")) << text;
    }

    void save(const DecisionSession& s) { persist("sessions", s.id, to_json(s).dump()); }

    static std::uint64_t id_number(const std::string& id) { return std::stoull(id.substr(1)); }

    void load_state()
    {
        if (!options_.state_dir)
            return;
        namespace fs = std::filesystem;
        auto files = [](const fs::path& dir) {
            std::vector<fs::path> out;
            if (fs::is_directory(dir))
                for (const auto& e : fs::directory_iterator(dir))
                    if (e.path().extension() == ".json")
                        out.push_back(e.path());
            std::sort(out.begin(), out.end());
            return out;
        };
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p);
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        for (const auto& f : files(fs::path(*options_.state_dir) / "problems")) {
            auto h = std::make_shared<ProblemHandle>();
            h->id = f.stem().string();
            h->problem = parse_problem(slurp(f));
            h->document = to_json(h->problem).dump();
            h->f_cache = std::make_unique<FlexCache>(h->problem);
            next_problem_ = std::max(next_problem_, id_number(h->id) + 1);
            problems_[h->id] = h;
        }
        for (const auto& f : files(fs::path(*options_.state_dir) / "sessions")) {
            auto slot = std::make_shared<SessionSlot>();
            slot->s = session_from_json(Json::parse(slurp(f)));
            next_session_ = std::max(next_session_, id_number(slot->s.id) + 1);
            sessions_[slot->s.id] = slot;
        }
    }
};

} // namespace flexrec::service
