#include <gtest/gtest.h>

#include <string>

#include "bbm/io.hpp"

using namespace bbm;

namespace
{
std::string default_text() {
    std::ifstream in(std::string(BBM_CONFIG_DIR) + "/default.json");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json default_doc() { return json::parse(default_text()); }
} // namespace

TEST(ParseConfig, DefaultDocument)
{
    const RunConfig cfg = parse_config(default_text());
    EXPECT_NEAR(cfg.table.area(), 0.44457, 5e-6);
    EXPECT_EQ(cfg.table.size(), 2u);
    EXPECT_EQ(cfg.sim.M, 1e6);
    EXPECT_EQ(cfg.sim.r, 0.01);
    EXPECT_EQ(cfg.sim.mode, DiskMode::stopped);
    EXPECT_EQ(cfg.experiment.name, "thm3");
    EXPECT_EQ(cfg.seed, 1u);
    EXPECT_EQ(cfg.document["schema_version"], kSchemaVersion);
}

TEST(ParseConfig, OverlappingScatterers)
{
    json doc = default_doc();
    doc["table"]["scatterers"][0]["radius"] = 0.4;
    doc["table"]["scatterers"][1]["radius"] = 0.4;
    try {
        parse_config(doc.dump());
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("disjoint"), std::string::npos);
    }
}

TEST(ParseConfig, MissingMassNamesTheField)
{
    json doc = default_doc();
    doc["sim"].erase("M");
    try {
        parse_config(doc.dump());
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("\"M\""), std::string::npos);
    }
}

TEST(ParseConfig, OtherFailures)
{
    EXPECT_THROW(parse_config("{ not json"), ParseError);
    EXPECT_THROW(parse_config("[1, 2]"), ParseError);

    json doc = default_doc();
    doc["sim"]["M"] = "heavy";
    EXPECT_THROW(parse_config(doc.dump()), ParseError);

    doc = default_doc();
    doc["table"]["scatterers"] = json::array({{{"center", {0.0, 0.0}}, {"radius", 0.1}}});
    EXPECT_THROW(parse_config(doc.dump()), ValidationError);

    doc = default_doc();
    doc["sim"]["Q0"] = {0.4, 0.0};
    EXPECT_THROW(parse_config(doc.dump()), ValidationError);

    doc = default_doc();
    doc["sim"]["V0"] = {0.01, 0.0};
    EXPECT_THROW(parse_config(doc.dump()), ValidationError);

    doc = default_doc();
    doc["sim"]["mode"] = "sideways";
    EXPECT_THROW(parse_config(doc.dump()), ParseError);

    doc = default_doc();
    doc["schema_version"] = 99;
    EXPECT_THROW(parse_config(doc.dump()), ParseError);
}

TEST(ParseConfig, InfiniteMass)
{
    json doc = default_doc();
    doc["sim"]["M"] = "inf";
    const RunConfig cfg = parse_config(doc.dump());
    EXPECT_TRUE(cfg.sim.infinite_mass());
    EXPECT_EQ(cfg.document["sim"]["M"], "inf");
}

TEST(ConfigHash, StableAndSensitive)
{
    RunConfig a = parse_config(default_text());
    const RunConfig b = parse_config(default_text());
    EXPECT_EQ(config_hash(a.document), config_hash(b.document));
    EXPECT_EQ(hex64(config_hash(a.document)).size(), 16u);
    set_seed(a, 2);
    EXPECT_NE(config_hash(a.document), config_hash(b.document));
    EXPECT_EQ(a.sim.seed, 2u);
    // reparsing the normalized document is a fixed point
    const RunConfig c = parse_config(b.document.dump());
    EXPECT_EQ(c.document, b.document);
}

TEST(EnsembleCsv, RoundTrip)
{
    const RunConfig cfg = parse_config(default_text());
    Ensemble e;
    e.regime = Regime::thm2;
    e.tau = {0.1, 0.2};
    for (int i = 0; i < 3; ++i) {
        PathSamples p;
        p.V = {Vec2{0.1 * i, 1.0 / 3.0}, Vec2{-2.5e-17, 7.0}};
        p.Q = {Vec2{0.5, 1e-300}, Vec2{0.51, -0.02}};
        p.frozen = {0, char(i == 1)};
        p.stopped = i == 1;
        e.paths.push_back(p);
    }
    const std::string text = ensemble_csv(e, cfg);
    EXPECT_NE(text.find("path,tau,Vx,Vy,Qx,Qy,frozen\n"), std::string::npos);
    EXPECT_EQ(text.rfind("# config_hash=", 0), 0u);
    const Ensemble back = read_ensemble_csv(text);
    EXPECT_EQ(back.regime, Regime::thm2);
    ASSERT_EQ(back.paths.size(), 3u);
    EXPECT_EQ(back.tau, e.tau);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back.paths[i].V[0].y, 1.0 / 3.0);
        EXPECT_EQ(back.paths[i].V[1].x, -2.5e-17);
        EXPECT_EQ(back.paths[i].Q[0].y, 1e-300);
        EXPECT_EQ(back.paths[i].stopped, e.paths[i].stopped);
    }
    EXPECT_THROW(read_ensemble_csv("a,b,c\n1,2,3\n"), ParseError);
}

TEST(Reports, HeaderCarriesConfigAndSeed)
{
    const RunConfig cfg = parse_config(default_text());
    const json h = report_header(cfg, "greenkubo");
    EXPECT_EQ(h["kind"], "greenkubo");
    EXPECT_EQ(h["seed"], 1u);
    EXPECT_EQ(h["config"], cfg.document);
    EXPECT_EQ(h["config_hash"], hex64(config_hash(cfg.document)));
    DiffusionMatrix d;
    d.m = Mat2{1, 2, 2, 3};
    d.per_lag = {Mat2::identity()};
    d.per_lag_stderr = {Mat2{}};
    const json j = to_json(d);
    EXPECT_EQ(j["matrix"][1][0], 2.0);
    EXPECT_EQ(j["per_lag"].size(), 1u);
    EXPECT_EQ(fmt(0.1), "0.10000000000000001");
}
