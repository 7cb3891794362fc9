#include <gtest/gtest.h>

#include <set>

#include "laddertx/engine.hpp"
#include "laddertx/generate.hpp"

using namespace laddertx;

namespace {

int depth(const Ladder& t) {
    int d = 0;
    for (const auto& b : branches(t)) d = std::max(d, 1 + (b.kind() == Ladder::Kind::Step ? depth(b.rest()) : 0));
    return d;
}

std::size_t widest(const Ladder& t) {
    auto bs = branches(t);
    std::size_t w = bs.size();
    for (const auto& b : bs)
        if (b.kind() == Ladder::Kind::Step) w = std::max(w, widest(b.rest()));
    return w;
}

}  // namespace

TEST(Generate, ScenariosRespectTheirBounds) {
    gen::Rng rng(1);
    gen::Options opt;
    for (int i = 0; i < 300; ++i) {
        auto sc = gen::scenario(rng, opt);
        ASSERT_TRUE(well_formed(sc.ot).ok()) << well_formed(sc.ot).to_string();
        ASSERT_TRUE(sc.src.validate().ok());
        EXPECT_LE(depth(sc.ot.body), opt.max_depth);
        EXPECT_GE(depth(sc.ot.body), 1);
        EXPECT_LE(widest(sc.ot.body), std::size_t(opt.max_branches));
        std::map<std::string, int> per_class;
        for (auto k : sc.src.keys()) ++per_class[sc.src.object(k).class_name];
        for (const auto& [cls, n] : per_class)
            if (cls != sc.src.metamodel().root_class) EXPECT_LE(n, opt.max_objects) << cls;
        EXPECT_LE(int(sc.ot.rungs.size()), opt.max_classes);
    }
}

TEST(Generate, SameSeedSameScenario) {
    gen::Rng a(42), b(42);
    for (int i = 0; i < 20; ++i) {
        auto x = gen::scenario(a);
        auto y = gen::scenario(b);
        EXPECT_EQ(x.ot, y.ot);
        EXPECT_EQ(x.src, y.src);
    }
}

TEST(Generate, MutationsChangeTheTargetAndCoverEveryKind) {
    gen::Rng rng(7);
    std::set<gen::TargetMutation> seen;
    for (int i = 0; i < 300; ++i) {
        auto sc = gen::scenario(rng);
        auto ex = execute(sc.ot, sc.src);
        auto m = gen::mutate_target(ex.target, rng);
        seen.insert(m.kind);
        EXPECT_FALSE(m.target == ex.target) << m.description;
        EXPECT_FALSE(verify(sc.ot, sc.src, m.target).holds) << m.description;
    }
    EXPECT_EQ(seen.size(), 5u);
}

TEST(Generate, InjectionHelpersTouchOneRung) {
    gen::Rng rng(9);
    auto sc = gen::scenario(rng);
    auto names = gen::exercised_rungs(sc.ot, sc.src);
    ASSERT_FALSE(names.empty());
    auto bad = gen::inject_succ(sc.ot, names.back());
    std::size_t changed = 0;
    for (std::size_t i = 0; i < bad.rungs.size(); ++i) changed += !(bad.rungs[i] == sc.ot.rungs[i]);
    EXPECT_EQ(changed, 1u);
    EXPECT_EQ(to_string(gen::find_rung(gen::pre_false(sc.ot, names.back()), names.back()).pre), "false");
}
