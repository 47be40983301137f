#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <set>

#include "smc/error.hpp"
#include "smc/models/calibration.hpp"
#include "smc/models/crra.hpp"
#include "smc/models/kelly.hpp"
#include "smc/models/registry.hpp"
#include "smc/sim/external.hpp"
#include "smc/sim/protocol.hpp"
#include "smc/sim/seed.hpp"

namespace {

using namespace smc;
using namespace smc::models;

TEST(Seeds, DistinctAndDeterministic) {
    EXPECT_NE(deriveSeed({0}, 0), deriveSeed({0}, 1));
    EXPECT_EQ(deriveSeed({9}, 1234), deriveSeed({9}, 1234));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(deriveSeed({7}, i));
    EXPECT_EQ(seen.size(), 10000u);
}

TEST(Seeds, FrozenTableForBase42) {
    constexpr std::array<std::uint64_t, 16> table{
        0xbdd732262feb6e95ULL, 0xba69ec90eb4fef88ULL, 0x369eae0b0ca19112ULL, 0x118e846ea93bc949ULL,
        0xbaee56f32e223007ULL, 0x7bb3c45c597cdb85ULL, 0xfb452912299a5453ULL, 0xf7e9f3f88cc04ad6ULL,
        0x89242d2dd9d4a40dULL, 0x4d5cb825dfaab05bULL, 0xeaeb7f27b54e2401ULL, 0x2c0e0fedbe2218a8ULL,
        0xeb01cfaf16b47eb0ULL, 0xce6a57a6e3ccdeecULL, 0xe9b316290724ba1bULL, 0xc7ab56057c8da907ULL,
    };
    for (std::uint64_t i = 0; i < table.size(); ++i) EXPECT_EQ(deriveSeed({42}, i), table[i]) << i;
}

TEST(Rng, ReferenceStream) {
    // xoshiro256** seeded from SplitMix64(0): first output from the published
    // reference implementation with that seeding.
    Rng a(0), b(0);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.nextU64(), b.nextU64());
    Rng r(0);
    std::uint64_t sm = 0;
    std::array<std::uint64_t, 4> s{};
    for (auto& w : s) w = splitMix64(sm);
    EXPECT_EQ(r.state(), s);
    const std::uint64_t s1 = s[1] * 5;
    const std::uint64_t expected = ((s1 << 7) | (s1 >> 57)) * 9;
    EXPECT_EQ(r.nextU64(), expected);
}

TEST(Rng, UniformRangeAndMoments) {
    Rng r(5);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sq += u * u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
    EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(Simulator, StepsObservableAndUnknown) {
    auto sim = makeCalibrationSim(Counter{});
    sim->reset(3);
    for (int i = 0; i < 5; ++i) sim->next();
    EXPECT_EQ(sim->eval("steps"), 5.0);
    EXPECT_EQ(sim->eval("x"), 5.0);
    EXPECT_THROW(sim->eval("nosuch"), UnknownObservableError);
}

TEST(RunTrajectory, InitialStateOnly) {
    auto sim = makeCalibrationSim(Counter{});
    const std::vector<std::string> obs{"x"};
    const std::vector<std::uint64_t> times{0};
    const auto m = runTrajectory(*sim, 1, 0, obs, times);
    ASSERT_EQ(m.rows, 1u);
    EXPECT_EQ(m.at(0, 0), 0.0);
    EXPECT_EQ(sim->stepCount(), 0u);
}

TEST(RunTrajectory, KellyPriceAtFirstStepIsSeedIndependent) {
    KellyMarket a(KellyMarketConfig{}), b(KellyMarketConfig{});
    const std::vector<std::string> obs{"price"};
    const std::vector<std::uint64_t> times{1};
    const auto ma = runTrajectory(a, 1, 1, obs, times);
    const auto mb = runTrajectory(b, 999, 1, obs, times);
    EXPECT_NEAR(ma.at(0, 0), 0.3 * 0.33 + 0.5 * 0.33 + 0.8 * 0.34, 1e-15);
    EXPECT_EQ(ma, mb);
}

TEST(RunTrajectory, SameSeedSameMatrix) {
    KellyMarket a(KellyMarketConfig{}), b(KellyMarketConfig{});
    const std::vector<std::string> obs{"0", "1", "2", "price"};
    const std::vector<std::uint64_t> times{0, 5, 50, 500};
    EXPECT_EQ(runTrajectory(a, 17, 500, obs, times), runTrajectory(b, 17, 500, obs, times));
}

TEST(RunTrajectory, FaultsCarryTheSeed) {
    auto sim = makeCalibrationSim(Counter{});
    const std::vector<std::string> obs{"nosuch"};
    const std::vector<std::uint64_t> times{0};
    EXPECT_THROW(runTrajectory(*sim, 1, 0, obs, times), UnknownObservableError);
}

TEST(Kelly, FullFractionIgnoresPrice) {
    KellyMarketConfig cfg;
    cfg.c = 1.0;
    KellyMarketState s;
    s.wealth = cfg.initialWealth;
    // With c = 1 each agent stakes its whole wealth in proportion to its
    // belief, so the post-round wealth is w_i * pi_i / p on a win.
    const double p = kellyClearingPrice(s.wealth, cfg);
    const auto next = kellyStep(s, cfg, 0.0);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(next.wealth[i], s.wealth[i] * cfg.beliefs[i] / p, 1e-15);
}

TEST(Kelly, AgentAtPriceKeepsWealth) {
    KellyMarketConfig cfg;
    cfg.beliefs = {0.3, 0.5, 0.8};
    cfg.initialWealth = {0.0, 1.0, 0.0};
    KellyMarketState s;
    s.wealth = cfg.initialWealth;
    const auto win = kellyStep(s, cfg, 0.0);
    const auto loss = kellyStep(s, cfg, 0.99);
    EXPECT_DOUBLE_EQ(win.wealth[1], 1.0);
    EXPECT_DOUBLE_EQ(loss.wealth[1], 1.0);
}

TEST(Kelly, WealthSharesSumToOne) {
    KellyMarket sim(KellyMarketConfig{});
    sim.reset(11);
    for (int t = 0; t < 10000; ++t) {
        sim.next();
        const auto& w = sim.state().wealth;
        ASSERT_NEAR(w[0] + w[1] + w[2], 1.0, 1e-9);
    }
}

TEST(Kelly, RejectsBadConfig) {
    KellyMarketConfig cfg;
    cfg.c = 1.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.initialWealth = {0.5, 0.5};
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Crra, BetSharesVanishAtOwnBelief) {
    const auto cfg = CrraMarketConfig::iidNoise();
    EXPECT_NEAR(crraBetShare1(cfg.pi1, cfg), 0.0, 1e-15);
    EXPECT_NEAR(crraBetShare2(cfg.pi2, cfg), 0.0, 1e-15);
}

TEST(Crra, ClearingPriceBalancesBets) {
    const auto cfg = CrraMarketConfig::ergodic();
    const std::array<double, 2> w{0.3, 0.7};
    const double p = crraClearingPrice(w, cfg);
    EXPECT_GT(p, cfg.pi1);
    EXPECT_LT(p, cfg.pi2);
    EXPECT_NEAR(w[0] * crraBetShare1(p, cfg) * p - w[1] * crraBetShare2(p, cfg) * (1 - p), 0.0, 1e-10);
}

TEST(Crra, IidNoiseScenarioIsUniform) {
    CrraMarket sim(CrraMarketConfig::iidNoise());
    sim.reset(3);
    const int n = 100000;
    double sum = 0, sq = 0, lag = 0, prev = 0;
    for (int t = 0; t < n; ++t) {
        sim.next();
        const double v = sim.eval("noise");
        ASSERT_GE(v, -0.5);
        ASSERT_LE(v, 0.5);
        sum += v;
        sq += v * v;
        lag += v * prev;
        prev = v;
        ASSERT_NEAR(sim.eval("reportedPrice"), sim.eval("price") + v, 1e-15);
    }
    EXPECT_NEAR(sum / n, 0.0, 0.005);
    EXPECT_NEAR(sq / n, 1.0 / 12.0, 0.002);
    EXPECT_NEAR(lag / n / (1.0 / 12.0), 0.0, 0.02);
}

TEST(Crra, WealthStaysNormalised) {
    CrraMarket sim(CrraMarketConfig::arNoise());
    sim.reset(8);
    for (int t = 0; t < 20000; ++t) {
        sim.next();
        ASSERT_NEAR(sim.eval("0") + sim.eval("1"), 1.0, 1e-12);
    }
}

TEST(Calibration, Ar1StationaryMoments) {
    auto sim = makeCalibrationSim(Ar1{0.9, 5.0, 1.0, 5.0});
    sim->reset(2);
    for (int i = 0; i < 1000; ++i) sim->next();
    const int n = 400000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        sim->next();
        const double x = sim->eval("x");
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 5.0, 0.05);
    EXPECT_NEAR(sq / n - mean * mean, 1.0 / (1.0 - 0.81), 0.15);
}

TEST(Registry, BindsBuiltinsAndRejectsUnknownKeys) {
    for (const auto& name : builtinModelNames()) {
        ModelSpec spec{name, {}};
        auto binding = bindModel(spec);
        auto sim = binding.factory();
        sim->reset(1);
        sim->next();
        for (const auto& o : binding.defaultObservables) EXPECT_TRUE(std::isfinite(sim->eval(o))) << name << " " << o;
    }
    EXPECT_THROW(bindModel({"kelly", {{"nope", "1"}}}), ConfigError);
    EXPECT_THROW(bindModel({"kelly", {{"piStar", "abc"}}}), ConfigError);
    EXPECT_THROW(bindModel({"nosuchmodel", {}}), ConfigError);
    EXPECT_THROW(bindModel({"crra", {{"scenario", "weird"}}}), ConfigError);
}

TEST(Registry, KellyParameters) {
    auto binding = bindModel({"kelly", {{"beliefs", "0.2,0.9"}, {"wealth", "0.5,0.5"}, {"piStar", "0.9"}}});
    auto sim = binding.factory();
    sim->reset(0);
    EXPECT_NEAR(sim->eval("price"), 0.55, 1e-15);
}

TEST(Protocol, HandleCommand) {
    auto sim = makeCalibrationSim(Counter{});
    EXPECT_EQ(protocol::handleCommand(*sim, "RESET 7"), "OK");
    EXPECT_EQ(protocol::handleCommand(*sim, "NEXT"), "OK");
    EXPECT_EQ(protocol::handleCommand(*sim, "EVAL x"), "1");
    EXPECT_EQ(protocol::handleCommand(*sim, "EVAL nosuch"), "ERR unknown observable");
    EXPECT_EQ(protocol::handleCommand(*sim, "RESET -1").value().rfind("ERR", 0), 0u);
    EXPECT_EQ(protocol::handleCommand(*sim, "FLY").value().rfind("ERR", 0), 0u);
    EXPECT_FALSE(protocol::handleCommand(*sim, "QUIT").has_value());
}

TEST(Protocol, RealsRoundTrip) {
    for (double v : {0.1, -1e-300, 6.02214076e23, 0.536, 1.0 / 3.0}) {
        EXPECT_EQ(protocol::parseReal(protocol::formatReal(v)), v);
    }
    EXPECT_FALSE(protocol::parseReal("banana").has_value());
    EXPECT_FALSE(protocol::parseReal("1.5x").has_value());
}

TEST(Protocol, ServeTranscript) {
    auto sim = makeCalibrationSim(Counter{});
    const std::string input = "RESET 1\nNEXT\nNEXT\nEVAL x\nEVAL steps\nBAD\nQUIT\nNEXT\n";
    std::FILE* in = fmemopen(const_cast<char*>(input.data()), input.size(), "r");
    char* buf = nullptr;
    std::size_t len = 0;
    std::FILE* out = open_memstream(&buf, &len);
    protocol::serve(*sim, in, out);
    std::fclose(in);
    std::fclose(out);
    EXPECT_EQ(std::string(buf, len), "OK\nOK\nOK\n2\n2\nERR unknown command\n");
    std::free(buf);
}

std::string serverCommand(const std::string& args) { return std::string("exec:") + SMC_MODEL_SERVER + " " + args; }

TEST(External, HandshakeAndEval) {
    auto sim = connectExternal(ExternalSimSpec::parse(serverCommand("--model kelly")));
    sim->reset(7);
    EXPECT_NEAR(sim->eval("price"), 0.536, 1e-15);
}

TEST(External, CrossImplementationTrajectory) {
    auto external = connectExternal(ExternalSimSpec::parse(serverCommand("--model kelly --model-param piStar=0.6")));
    KellyMarketConfig cfg;
    cfg.piStar = 0.6;
    KellyMarket local(cfg);
    for (std::uint64_t seed : {1u, 7u, 99u}) {
        external->reset(seed);
        local.reset(seed);
        for (int t = 0; t < 100; ++t) {
            for (const char* o : {"0", "1", "2", "price"}) ASSERT_EQ(external->eval(o), local.eval(o)) << t << o;
            external->next();
            local.next();
        }
    }
}

TEST(External, UnknownObservable) {
    auto sim = connectExternal(ExternalSimSpec::parse(serverCommand("--model kelly")));
    EXPECT_THROW(sim->eval("nosuch"), UnknownObservableError);
    EXPECT_NEAR(sim->eval("price"), 0.536, 1e-15);
}

TEST(External, BananaIsAProtocolViolation) {
    auto sim = connectExternal(ExternalSimSpec::parse(std::string("exec:") + SMC_FAULT_SIM + " --banana"));
    try {
        sim->eval("x");
        FAIL() << "expected ProtocolError";
    } catch (const ProtocolError& e) {
        EXPECT_NE(std::string(e.what()).find("banana"), std::string::npos) << e.what();
    }
}

TEST(External, CrashSurfacesAsProtocolError) {
    auto sim = connectExternal(ExternalSimSpec::parse(std::string("exec:") + SMC_FAULT_SIM + " --crash-after-next 3"));
    sim->reset(1);
    sim->next();
    sim->next();
    sim->next();
    EXPECT_THROW(sim->next(), ProtocolError);
}

TEST(External, TimeoutOnSilentSimulator) {
    auto spec = ExternalSimSpec::parse(std::string("exec:") + SMC_FAULT_SIM + " --hang");
    spec.timeout = std::chrono::milliseconds(300);
    auto sim = connectExternal(spec);
    EXPECT_THROW(sim->eval("x"), ProtocolError);
}

TEST(External, LaunchFailure) {
    EXPECT_THROW(connectExternal(ExternalSimSpec::parse("exec:/nonexistent/simulator")), ProtocolError);
    EXPECT_THROW(ExternalSimSpec::parse("ftp:somewhere"), ConfigError);
}

TEST(External, TcpTransport) {
    std::FILE* server = popen((std::string(SMC_MODEL_SERVER) + " --model counter --listen 0 --once").c_str(), "r");
    ASSERT_NE(server, nullptr);
    unsigned port = 0;
    ASSERT_EQ(std::fscanf(server, "listening %u", &port), 1);
    {
        auto sim = connectExternal(ExternalSimSpec::parse("tcp:127.0.0.1:" + std::to_string(port)));
        sim->reset(4);
        sim->next();
        sim->next();
        EXPECT_EQ(sim->eval("x"), 2.0);
    }
    EXPECT_EQ(pclose(server), 0);
}

}  // namespace
