#include <random>
#include <set>

#include "doctest.h"
#include "hlsdse/dse.hpp"

using namespace hlsdse;

namespace {

CostPoint pt(double lat, double area, long long idx = -1) {
    CostPoint p;
    p.latency = lat;
    p.area = area;
    p.config_index = idx;
    return p;
}

// O(n^2) exhaustive-dominance oracle.
std::vector<int> pareto_oracle(const std::vector<CostPoint>& points) {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
        bool dominated = false;
        for (int j = 0; j < static_cast<int>(points.size()) && !dominated; ++j) {
            if (i == j) continue;
            const bool le = points[j].latency <= points[i].latency &&
                            points[j].area <= points[i].area;
            const bool ne = points[j].latency != points[i].latency ||
                            points[j].area != points[i].area;
            dominated = le && ne;
        }
        if (!dominated) out.push_back(i);
    }
    return out;
}

std::vector<CostPoint> random_points(std::mt19937_64& rng, int n, int grid) {
    std::vector<CostPoint> pts;
    for (int i = 0; i < n; ++i) {
        const double lat = 1.0 + static_cast<double>(rng() % grid);
        const double area = 1.0 + static_cast<double>(rng() % grid);
        pts.push_back(pt(lat, area, i));
    }
    return pts;
}

}  // namespace

TEST_CASE("pareto_front: hand cases") {
    CHECK(pareto_front({pt(1, 1)}) == std::vector<int>{0});

    std::vector<CostPoint> pts{pt(1, 3), pt(2, 2), pt(3, 1), pt(2, 3)};
    CHECK(pareto_front(pts) == std::vector<int>{0, 1, 2});

    // duplicates of a retained point are all retained
    CHECK(pareto_front({pt(1, 1), pt(1, 1)}) == std::vector<int>{0, 1});
    CHECK(pareto_front({pt(1, 1), pt(1, 1), pt(0.5, 0.5)}) == std::vector<int>{2});
}

TEST_CASE("pareto_front matches the exhaustive oracle") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 120; ++rep) {
        const int n = 1 + static_cast<int>(rng() % 300);
        const int grid = 1 + static_cast<int>(rng() % 40);  // force ties/duplicates
        auto pts = random_points(rng, n, grid);
        CHECK(pareto_front(pts) == pareto_oracle(pts));
    }
    // a couple of large instances
    for (int rep = 0; rep < 5; ++rep) {
        auto pts = random_points(rng, 1000, 100);
        CHECK(pareto_front(pts) == pareto_oracle(pts));
    }
}

TEST_CASE("iterative_fronts peels disjoint fronts") {
    std::vector<CostPoint> pts{pt(1, 3), pt(2, 2), pt(3, 1), pt(2, 3)};
    auto one = iterative_fronts(pts, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == pareto_front(pts));

    auto two = iterative_fronts(pts, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[1] == std::vector<int>{3});

    // more fronts than exist: returns fewer
    auto many = iterative_fronts(pts, 10);
    CHECK(many.size() == 2);

    // fronts partition the input
    std::mt19937_64 rng(22);
    for (int rep = 0; rep < 20; ++rep) {
        auto rpts = random_points(rng, 60, 8);
        auto fronts = iterative_fronts(rpts, 100);
        std::set<int> seen;
        for (const auto& f : fronts) {
            CHECK(!f.empty());
            for (int i : f) CHECK(seen.insert(i).second);
        }
        CHECK(seen.size() == rpts.size());
    }
    CHECK_THROWS_AS(iterative_fronts(pts, 0), std::invalid_argument);
}

TEST_CASE("aggregate_area formula") {
    DeviceProfile caps;
    caps.ff = 1000;
    caps.lut = 2000;
    caps.dsp = 50;
    CHECK(aggregate_area(0, 0, 0, caps) == 0.0);
    CHECK(aggregate_area(100, 200, 5, caps) == doctest::Approx(0.3).epsilon(1e-15));
    // linearity
    CHECK(aggregate_area(200, 400, 10, caps) ==
          doctest::Approx(2 * aggregate_area(100, 200, 5, caps)).epsilon(1e-15));
    DeviceProfile bad;
    bad.dsp = 0;
    CHECK_THROWS_AS(aggregate_area(1, 1, 1, bad), std::invalid_argument);
}

TEST_CASE("adrs: hand-derived cases exact to 1e-12") {
    // self distance
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 100; ++rep) {
        auto pts = random_points(rng, 1 + static_cast<int>(rng() % 20), 30);
        auto front = pareto_front(pts);
        std::vector<CostPoint> f;
        for (int i : front) f.push_back(pts[i]);
        CHECK(adrs(f, f) == 0.0);
    }

    // reference {(A=1,L=1)}, approx {(A=2,L=1)}
    std::vector<CostPoint> ref1{pt(1, 1)};
    std::vector<CostPoint> ap1{pt(1, 2)};
    CHECK(std::abs(adrs(ref1, ap1) - 1.0) < 1e-12);

    // reference {(A=1,L=2),(A=2,L=1)}, approx {(A=2,L=2)}
    std::vector<CostPoint> ref2{pt(2, 1), pt(1, 2)};
    std::vector<CostPoint> ap2{pt(2, 2)};
    CHECK(std::abs(adrs(ref2, ap2) - 1.0) < 1e-12);

    // nonnegative, invariant to duplicates
    for (int rep = 0; rep < 50; ++rep) {
        auto a = random_points(rng, 8, 10);
        auto b = random_points(rng, 8, 10);
        const double v = adrs(a, b);
        CHECK(v >= 0.0);
        auto a2 = a;
        a2.insert(a2.end(), a.begin(), a.end());
        auto b2 = b;
        b2.push_back(b.front());
        CHECK(adrs(a2, b2) == doctest::Approx(v).epsilon(1e-15));
    }

    // zero iff every reference point weakly dominated under d
    std::vector<CostPoint> ref3{pt(2, 2)};
    std::vector<CostPoint> better{pt(1, 1)};
    CHECK(adrs(ref3, better) == 0.0);

    CHECK_THROWS_AS(adrs({}, ap1), std::invalid_argument);
    CHECK_THROWS_AS(adrs(ref1, {}), std::invalid_argument);
}

TEST_CASE("explore_with_costs: perfect and constant predictors") {
    Design d = make_builtin_design("gather", 31);
    const DeviceProfile device;
    auto oracle = [&](const Configuration& c) {
        return d.records[config_index(d.space, c)];
    };

    // perfect predictor: predictions equal the oracle costs
    std::vector<CostPoint> perfect(d.records.size());
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        const auto& r = d.records[i];
        perfect[i].latency = r.lat;
        perfect[i].area = aggregate_area(static_cast<double>(r.ff),
                                         static_cast<double>(r.lut),
                                         static_cast<double>(r.dsp), device);
        perfect[i].config_index = static_cast<long long>(i);
    }
    DseConfig cfg;
    cfg.max_fronts = 5;
    DseReport rep = explore_with_costs(d.space, perfect, oracle, {0, 1}, cfg);
    REQUIRE(!rep.fronts.empty());
    CHECK(rep.fronts[0].adrs_value == 0.0);
    CHECK(rep.final_adrs == 0.0);
    CHECK(rep.synthesis_count ==
          rep.initial_samples + static_cast<long long>([&] {
              std::set<long long> q;
              for (const auto& f : rep.fronts)
                  for (long long i : f.new_queries) q.insert(i);
              q.erase(0);
              q.erase(1);
              return q.size();
          }()));

    // constant predictor: still well-formed, finite ADRS
    std::vector<CostPoint> flat(d.records.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        flat[i] = pt(1.0, 1.0, static_cast<long long>(i));
    }
    DseConfig cfg1 = cfg;
    cfg1.max_fronts = 1;
    DseReport rep2 = explore_with_costs(d.space, flat, oracle, {5}, cfg1);
    CHECK(std::isfinite(rep2.final_adrs));
    CHECK(rep2.synthesis_count >= 1);

    // ADRS non-increasing across fronts; synthesis count non-decreasing
    std::mt19937_64 rng(24);
    std::vector<CostPoint> noisy = perfect;
    for (auto& p : noisy) {
        p.latency *= 1.0 + 0.3 * ((rng() % 100) / 100.0 - 0.5);
        p.area *= 1.0 + 0.3 * ((rng() % 100) / 100.0 - 0.5);
    }
    DseReport rep3 = explore_with_costs(d.space, noisy, oracle, {0, 7, 9}, cfg);
    for (std::size_t f = 1; f < rep3.fronts.size(); ++f) {
        CHECK(rep3.fronts[f].adrs_value <= rep3.fronts[f - 1].adrs_value + 1e-15);
        CHECK(rep3.fronts[f].synthesis_count >= rep3.fronts[f - 1].synthesis_count);
    }

    // report serialization round-trips through JSON parsing
    const std::string doc = rep3.serialize();
    CHECK(doc.find("\"final_adrs\"") != std::string::npos);
    const std::string csv = rep3.adrs_table_csv();
    CHECK(csv.rfind("front,adrs,synthesis_count\n", 0) == 0);
}

TEST_CASE("run_dse end-to-end on a tiny model") {
    Design d = make_builtin_design("gather", 33);
    FeatureSchema schema;
    auto oracle = [&](const Configuration& c) {
        return d.records[config_index(d.space, c)];
    };
    Hyperparams hp;
    hp.propagation_layers = 2;
    hp.node_hidden = 8;
    hp.global_hidden = 10;
    hp.attention_heads = 2;
    hp.attention_hidden = 8;
    Model m = Model::init_gnn(schema.node_width(), hp, schema.fingerprint(), 77);

    DseConfig cfg;
    cfg.max_fronts = 3;
    cfg.seed = 5;
    cfg.finetune.updates = 10;
    cfg.finetune.batch_size = 8;
    DseReport rep = run_dse(m, d.graph, d.space, schema, oracle, cfg);
    CHECK(rep.initial_samples == FinetuneConfig::sample_budget(d.space.size()));
    CHECK(rep.synthesis_count >= rep.initial_samples);
    CHECK(std::isfinite(rep.final_adrs));
    REQUIRE(rep.fronts.size() == 3);

    // determinism
    DseReport rep2 = run_dse(m, d.graph, d.space, schema, oracle, cfg);
    CHECK(rep.serialize() == rep2.serialize());

    // larger K never queries fewer configurations
    DseConfig cfg5 = cfg;
    cfg5.max_fronts = 5;
    DseReport rep5 = run_dse(m, d.graph, d.space, schema, oracle, cfg5);
    CHECK(rep5.synthesis_count >= rep.synthesis_count);

    // oversized budgets clamp
    DseConfig huge = cfg;
    huge.budget_override = d.space.size() + 50;
    DseReport rep6 = run_dse(m, d.graph, d.space, schema, oracle, huge);
    CHECK(rep6.initial_samples == d.space.size());
}

TEST_CASE("device profile files round-trip") {
    DeviceProfile p;
    p.ff = 1000;
    p.lut = 2000;
    p.dsp = 50;
    DeviceProfile back = DeviceProfile::deserialize(p.serialize());
    CHECK(back.ff == 1000);
    CHECK(back.lut == 2000);
    CHECK(back.dsp == 50);
    CHECK_THROWS_AS(DeviceProfile::deserialize("{\"ff\": 0, \"lut\": 1, \"dsp\": 1}"),
                    SchemaError);
}
