#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "onset/error.hpp"
#include "onset/grammar.hpp"
#include "onset/lm_backend.hpp"
#include "onset/lm_gateway.hpp"
#include "onset/semantic_index.hpp"
#include "support.hpp"

using namespace onset;
using onset::testing::dbo;

namespace {

const char* kFigure1Labels =
    R"({"nodes":[{"id":"p1","class":"person"},{"id":"p2","class":"person"},{"id":"u","class":"university"}],)"
    R"("edges":[{"from":"p1","link":"child","to":"p2"},{"from":"p1","link":"alma mater","to":"u"},)"
    R"({"from":"p2","link":"alma mater","to":"u"}]})";

const char* kFigure1Query = "a person and the child of a person have the alma mater of the same university";

CandidateSet candidates(std::vector<std::string> classes, std::vector<std::string> links) {
    CandidateSet c;
    for (auto& iri : classes) c.classes.push_back({std::move(iri), 1.0});
    for (auto& iri : links) c.links.push_back({std::move(iri), 1.0});
    return c;
}

// Serves canned replies on a random local port for the lifetime of the object.
class FakeServer {
public:
    explicit FakeServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server_.Post(".*", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeServer() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST(Gateway, RawExtractionOfFigure1Query) {
    auto backend = MockScriptedBackend::replay({kFigure1Labels});
    LmGateway gw(backend);
    auto r = gw.extract_raw(kFigure1Query);
    EXPECT_EQ(r.graph.stage, GraphStage::raw);
    EXPECT_EQ(r.graph.nodes.size(), 3u);
    EXPECT_EQ(r.graph.edges.size(), 3u);
    EXPECT_EQ(backend->calls(), 1u);
}

TEST(Gateway, PromptCarriesQueryAndStaticGrammar) {
    LmRequest seen;
    auto backend = std::make_shared<MockScriptedBackend>([&](const LmRequest& r) {
        seen = r;
        return std::string(R"({"nodes":[],"edges":[]})");
    });
    LmGateway gw(backend, {.temperature = 0.0, .max_tokens = 256, .seed = 9, .model = "m"});
    auto r = gw.extract_raw(kFigure1Query);
    EXPECT_TRUE(r.graph.empty());
    EXPECT_NE(seen.prompt.find(kFigure1Query), std::string::npos);
    ASSERT_TRUE(seen.grammar);
    EXPECT_EQ(seen.grammar->text, static_schema_grammar().text);
    EXPECT_EQ(seen.task, LmTask::extract_raw);
    EXPECT_EQ(seen.max_tokens, 256);
    EXPECT_EQ(seen.seed, 9);
    EXPECT_EQ(seen.model, "m");
}

TEST(Gateway, BlankQueryFailsBeforeAnyRequest) {
    auto backend = MockScriptedBackend::replay({kFigure1Labels});
    LmGateway gw(backend);
    EXPECT_THROW(gw.extract_raw(""), InvalidArgument);
    EXPECT_THROW(gw.extract_raw("   \n"), InvalidArgument);
    EXPECT_EQ(backend->calls(), 0u);
}

TEST(Gateway, ConstructorPreconditions) {
    EXPECT_THROW(LmGateway(nullptr), InvalidArgument);
    EXPECT_THROW(LmGateway(MockScriptedBackend::replay({""}), {.max_tokens = 10}), InvalidArgument);
}

TEST(Gateway, ConstrainedExtractionStaysInVocabulary) {
    auto onto = onset::testing::dbpedia();
    auto cands = candidates({dbo("Person"), dbo("University"), dbo("EducationalInstitution")},
                            {dbo("almaMater"), dbo("child")});
    std::set<std::string> classes = {dbo("Person"), dbo("University"), dbo("EducationalInstitution")};
    std::set<std::string> links = {dbo("almaMater"), dbo("child")};
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        LmGateway gw(std::make_shared<MockRandomBackend>(seed));
        auto r = gw.extract_constrained(kFigure1Query, cands, *onto);
        EXPECT_EQ(r.graph.stage, GraphStage::constrained);
        for (const auto& n : r.graph.nodes) EXPECT_TRUE(classes.count(n.class_iri)) << n.class_iri;
        for (const auto& e : r.graph.edges) EXPECT_TRUE(links.count(e.link_iri)) << e.link_iri;
    }
}

TEST(Gateway, SingleClassNoLinksGivesNodeOnlyGraph) {
    auto onto = onset::testing::dbpedia();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        LmGateway gw(std::make_shared<MockRandomBackend>(seed));
        auto r = gw.extract_constrained("people", candidates({dbo("Person")}, {}), *onto);
        EXPECT_TRUE(r.graph.edges.empty());
        for (const auto& n : r.graph.nodes) EXPECT_EQ(n.class_iri, dbo("Person"));
    }
}

TEST(Gateway, ConstrainedLabelsMapToIrisAndCanonicalIds) {
    auto onto = onset::testing::dbpedia();
    auto backend = MockScriptedBackend::replay({kFigure1Labels});
    LmGateway gw(backend);
    auto r = gw.extract_constrained(kFigure1Query,
                                    candidates({dbo("Person"), dbo("University")}, {dbo("child"), dbo("almaMater")}),
                                    *onto);
    auto expected = onset::testing::figure1_graph();
    expected.stage = GraphStage::constrained;
    EXPECT_EQ(r.graph, expected);
}

TEST(Gateway, GrammarIgnoringServerIsNonConformant) {
    auto onto = onset::testing::dbpedia();
    const std::string junk = "Sure! Here is your graph: person -> university";
    LmGateway gw(MockScriptedBackend::replay({junk}));
    try {
        gw.extract_raw(kFigure1Query);
        FAIL() << "expected NonConformanceError";
    } catch (const NonConformanceError& e) {
        EXPECT_EQ(e.completion(), junk);
    }
    LmGateway gw2(MockScriptedBackend::replay({R"({"nodes":[{"id":"a","class":"Animal"}],"edges":[]})"}));
    EXPECT_THROW(gw2.extract_constrained("q", candidates({dbo("Person")}, {}), *onto), NonConformanceError);
}

TEST(Gateway, QueryGenerationEchoesSentence) {
    auto toy = onset::testing::toy();
    PrototypeGraph g;
    g.stage = GraphStage::sampled;
    g.nodes = {{"person_1", dbo("Person")}, {"university_1", dbo("University")}};
    g.edges = {{"person_1", dbo("almaMater"), "university_1"}};
    LmRequest seen;
    auto backend = std::make_shared<MockScriptedBackend>([&](const LmRequest& r) {
        seen = r;
        return std::string("Request: \"people and the university they studied at\"\nextra");
    });
    LmGateway gw(backend);
    EXPECT_EQ(gw.generate_query_text(g, *toy), "people and the university they studied at");
    EXPECT_EQ(seen.task, LmTask::generate_query);
    EXPECT_FALSE(seen.grammar);
    EXPECT_NE(seen.prompt.find("person_1 (Person) --alma mater [almaMater]--> university_1 (University)"),
              std::string::npos);

    LmGateway oracle(std::make_shared<MockOracleBackend>(g, "fixed sentence"));
    EXPECT_EQ(oracle.generate_query_text(g, *toy), "fixed sentence");
}

TEST(Gateway, FingerprintTracksOptions) {
    auto b = MockScriptedBackend::replay({""});
    LmGateway a(b, {.temperature = 0.2});
    LmGateway c(b, {.temperature = 0.7});
    LmGateway a2(b, {.temperature = 0.2});
    EXPECT_NE(a.fingerprint(), c.fingerprint());
    EXPECT_EQ(a.fingerprint(), a2.fingerprint());
    EXPECT_EQ(local_name(dbo("almaMater")), "almaMater");
    EXPECT_EQ(local_name("http://x.org/a#b"), "b");
}

TEST(Gateway, BoundsConcurrentRequests) {
    std::atomic<int> active{0}, peak{0};
    auto backend = std::make_shared<MockScriptedBackend>([&](const LmRequest&) {
        int now = ++active;
        int prev = peak.load();
        while (now > prev && !peak.compare_exchange_weak(prev, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        --active;
        return std::string(R"({"nodes":[],"edges":[]})");
    });
    LmGateway gw(backend, {.max_in_flight = 2});
    std::vector<std::jthread> threads;
    for (int i = 0; i < 8; ++i) threads.emplace_back([&] { gw.extract_raw("q"); });
    threads.clear();
    EXPECT_LE(peak.load(), 2);
    EXPECT_EQ(backend->calls(), 8u);
}

TEST(MockRandom, DeterministicPerPromptAndSeed) {
    MockRandomBackend a(5), b(5), c(6);
    LmRequest r{.prompt = "p", .grammar = static_schema_grammar()};
    EXPECT_EQ(a.complete(r), b.complete(r));
    std::set<std::string> outs;
    for (int s = 0; s < 10; ++s) outs.insert(MockRandomBackend(s).complete(r));
    EXPECT_GT(outs.size(), 1u);
    (void)c;
}

TEST(HttpBackend, LlamaCppCompletionRoundTrip) {
    nlohmann::json received;
    FakeServer server([&](const httplib::Request& req, httplib::Response& res) {
        EXPECT_EQ(req.path, "/completion");
        received = nlohmann::json::parse(req.body);
        res.set_content(nlohmann::json({{"content", kFigure1Labels}}).dump(), "application/json");
    });
    auto backend = std::make_shared<HttpLmBackend>(HttpLmConfig{.base_url = server.url(), .model = "tiny"});
    LmGateway gw(backend, {.seed = 4});
    auto r = gw.extract_raw(kFigure1Query);
    EXPECT_EQ(r.graph.nodes.size(), 3u);
    EXPECT_EQ(received["grammar"], static_schema_grammar().text);
    EXPECT_EQ(received["seed"], 4);
    EXPECT_EQ(received["model"], "tiny");
    EXPECT_EQ(received["n_predict"], 1024);
}

TEST(HttpBackend, OpenAiSchemaModeRoundTrip) {
    nlohmann::json received;
    FakeServer server([&](const httplib::Request& req, httplib::Response& res) {
        EXPECT_EQ(req.path, "/v1/chat/completions");
        EXPECT_EQ(req.get_header_value("Authorization"), "Bearer sk");
        received = nlohmann::json::parse(req.body);
        // Schema servers may reformat whitespace.
        nlohmann::json doc = nlohmann::json::parse(kFigure1Labels);
        nlohmann::json reply = {{"choices", {{{"message", {{"content", doc.dump(2)}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    auto backend = std::make_shared<HttpLmBackend>(HttpLmConfig{
        .base_url = server.url(), .model = "gpt", .api = HttpApi::openai_json_schema, .api_key = "sk"});
    EXPECT_FALSE(backend->exact_grammar());
    LmGateway gw(backend);
    auto r = gw.extract_raw(kFigure1Query);
    EXPECT_EQ(r.graph.edges.size(), 3u);
    EXPECT_EQ(received["response_format"]["type"], "json_schema");
}

TEST(HttpBackend, ServerErrorsAndUnreachableHosts) {
    FakeServer server([](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("boom", "text/plain");
    });
    HttpLmBackend failing({.base_url = server.url()});
    EXPECT_THROW(failing.complete({.prompt = "x"}), BackendError);
    HttpLmBackend down({.base_url = "http://127.0.0.1:1", .timeout = std::chrono::seconds(2)});
    EXPECT_THROW(down.complete({.prompt = "x"}), BackendError);
    EXPECT_THROW(http_api_from_string("grpc"), InvalidArgument);
}
