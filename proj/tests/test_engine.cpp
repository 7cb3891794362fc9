#include <gtest/gtest.h>

#include <set>

#include "laddertx/engine.hpp"
#include "laddertx/generate.hpp"
#include "laddertx/uml2sql.hpp"
#include "support.hpp"

using namespace laddertx;

namespace {

/// Oracle for copy-id transformations: walks source and target side by
/// side and checks that every S list holds exactly the ids of the R children
/// whose precondition holds, in order, with class names given by the rungs.
void expect_mirror(const Ladder& t, const ModelInstance& src, ObjectKey x, const ModelInstance& tgt, ObjectKey y,
                   const std::string& where) {
    std::map<std::string, std::vector<ObjectKey>> consumed;
    for (const auto& b : branches(t)) {
        std::vector<ObjectKey> wanted;
        for (auto c : src.navigate_path(x, b.src_nav()))
            if (eval_pred(b.child().pre, &src.object(c), nullptr)) wanted.push_back(c);
        const auto& list = tgt.object(y).refs.at(b.tgt_rel());
        auto& used = consumed[b.tgt_rel()];
        std::size_t offset = used.size();
        ASSERT_GE(list.size(), offset + wanted.size()) << where << " " << b.tgt_rel();
        for (std::size_t i = 0; i < wanted.size(); ++i) {
            ObjectKey yc = list[offset + i];
            EXPECT_EQ(tgt.object(yc).class_name, b.child().tgt_class) << where;
            EXPECT_EQ(tgt.object(yc).id, src.object(wanted[i]).id) << where;
            used.push_back(yc);
            if (b.kind() == Ladder::Kind::Step)
                expect_mirror(b.rest(), src, wanted[i], tgt, yc, where + "/" + src.ref(wanted[i]).to_string());
        }
    }
    for (const auto& [rel, used] : consumed) EXPECT_EQ(tgt.object(y).refs.at(rel).size(), used.size()) << where;
}

bool cites_only(const Verdict& v, const std::string& rung) {
    for (const auto& f : v.failures)
        if (f.rung != rung) return false;
    return !v.failures.empty();
}

}  // namespace

TEST(Execute, Uml2SqlReproducesS1) {
    auto ex = execute(uml2sql::transformation(), uml2sql::m1(), "s1");
    EXPECT_TRUE(ex.verdict.holds);
    EXPECT_TRUE(ex.verdict.failures.empty());
    EXPECT_EQ(ex.target, uml2sql::s1());
    EXPECT_TRUE(ex.certificate.holds);
}

TEST(Execute, Uml2SqlKeyColumnComesFirst) {
    auto ex = execute(uml2sql::transformation(), uml2sql::m1(), "s1");
    const auto& t = ex.target;
    auto cols = [&](Nat table) {
        std::vector<std::string> out;
        for (auto c : t.navigate(*t.find({"Table", table}), "columns"))
            out.push_back(t.ref(c).to_string() + (t.object(c).flags.at("isKey") ? "*" : ""));
        return out;
    };
    EXPECT_EQ(cols(2), (std::vector<std::string>{"Column#2*", "Column#5", "Column#6", "Column#7"}));
    EXPECT_EQ(cols(3), (std::vector<std::string>{"Column#3*", "Column#8"}));
    EXPECT_EQ(cols(4), (std::vector<std::string>{"Column#4*"}));
}

TEST(Execute, NestedTargetSkipsVacuousAndUnmapped) {
    auto doc = support::load({"nested.mt"});
    auto ex = execute(*doc.find_transformation("nested"), *doc.find_instance("nested_src"), "expected");
    ASSERT_TRUE(ex.verdict.holds);
    auto want = parse_or_throw(support::slurp(support::data_path("nested.mt")) + R"(
instance expected : Tgt {
  P#1 { q=[Q#2] }
  Q#2 { r=[R#5], s=[S#4] }
  R#5 { }
  S#4 { t=[T#7] }
  T#7 { u=[U#8, U#9], v=[V#10], w=[W#11] }
  U#8 { }
  U#9 { }
  V#10 { }
  W#11 { }
}
)");
    EXPECT_EQ(ex.target, *want.find_instance("expected"));
    // D#6 has keep=false: one vacuous node, no R#6.
    EXPECT_EQ(ex.certificate.root.count(CertKind::Vacuous), 1u);
    EXPECT_FALSE(ex.target.find({"R", 6}));
}

TEST(Execute, RandomScenariosMirrorTheSource) {
    gen::Rng rng(2024);
    gen::Options opt;
    opt.keep_pre_prob = 0.3;
    opt.one_prob = 0.2;
    for (int i = 0; i < 150; ++i) {
        auto sc = gen::scenario(rng, opt);
        auto ex = execute(sc.ot, sc.src);
        ASSERT_TRUE(ex.verdict.holds) << print(sc.ot) << print(sc.src);
        EXPECT_EQ(ex.target.object(ex.target.root_key()).id, sc.src.object(sc.src.root_key()).id);
        expect_mirror(sc.ot.body, sc.src, sc.src.root_key(), ex.target, ex.target.root_key(), "root");
    }
}

TEST(Execute, RootPreconditionFalseMeansNoObligation) {
    auto ot = uml2sql::transformation();
    ot = gen::pre_false(ot, "Model2Schema");
    EXPECT_THROW(execute(ot, uml2sql::m1()), RootPreconditionFalse);
    // Any target satisfies the specification then.
    auto v = verify(ot, uml2sql::m1(), uml2sql::s1());
    EXPECT_TRUE(v.holds);
    EXPECT_EQ(v.trace.children.at(0).kind, CertKind::Vacuous);
}

TEST(Execute, LastEmitGoesAfterChildren) {
    auto ot = uml2sql::transformation();
    auto r = uml2sql::class2table();
    r.map.emits[0].placement = Placement::Last;
    ot = substitute_rung(ot, "Class2Table", r);
    ASSERT_TRUE(well_formed(ot).ok());
    auto ex = execute(ot, uml2sql::m1());
    ASSERT_TRUE(ex.verdict.holds);
    const auto& t = ex.target;
    auto cols = t.navigate(*t.find({"Table", 2}), "columns");
    EXPECT_EQ(t.ref(cols.back()).to_string(), "Column#2");
    EXPECT_TRUE(verify(ot, uml2sql::m1(), t).holds);
    // The unmodified transformation expects the key first.
    EXPECT_FALSE(verify(uml2sql::transformation(), uml2sql::m1(), t).holds);
}

TEST(Verify, BrokenTargetCitesMissingWitnessForClass4) {
    auto doc = support::load({"uml2sql.mt", "m1.mt", "s1_broken.mt"});
    auto v = verify(*doc.find_transformation("uml2sql"), *doc.find_instance("m1"), *doc.find_instance("s1_broken"));
    EXPECT_FALSE(v.holds);
    bool witness = false;
    for (const auto& f : v.failures)
        if (f.conjunct == Conjunct::Link && f.src == ObjectRef{"Class", 4}) witness = true;
    EXPECT_TRUE(witness);
}

TEST(Verify, SpecificTargetDefects) {
    auto ot = uml2sql::transformation();
    auto m1 = uml2sql::m1();
    auto edit = [](auto&& f) {
        auto s = uml2sql::s1().unfrozen_copy();
        f(s);
        s.freeze();
        return s;
    };
    auto key_not_key = edit([](ModelInstance& s) { s.set_flag(*s.find({"Column", 3}), "isKey", false); });
    auto v = verify(ot, m1, key_not_key);
    ASSERT_FALSE(v.holds);
    EXPECT_EQ(v.failures.front().rung, "Class2Table");

    auto attr_as_key = edit([](ModelInstance& s) { s.set_flag(*s.find({"Column", 8}), "isKey", true); });
    v = verify(ot, m1, attr_as_key);
    ASSERT_FALSE(v.holds);
    EXPECT_TRUE(cites_only(v, "Attribute2Column"));

    auto reordered = edit([](ModelInstance& s) {
        auto t = *s.find({"Table", 2});
        auto cols = s.navigate(t, "columns");
        std::swap(cols[1], cols[2]);
        s.set_refs(t, "columns", cols);
    });
    v = verify(ot, m1, reordered);
    ASSERT_FALSE(v.holds);
    EXPECT_TRUE(cites_only(v, "Attribute2Column"));

    auto renamed_root = edit([](ModelInstance& s) { s.set_id(s.root_key(), 9); });
    v = verify(ot, m1, renamed_root);
    ASSERT_FALSE(v.holds);
    EXPECT_TRUE(cites_only(v, "Model2Schema"));
}

TEST(Verify, ModesAgreeAndCertificatesCoincide) {
    gen::Rng rng(5);
    gen::Options opt;
    opt.keep_pre_prob = 0.3;
    for (int i = 0; i < 100; ++i) {
        auto sc = gen::scenario(rng, opt);
        auto ex = execute(sc.ot, sc.src);
        auto w = verify(sc.ot, sc.src, ex.target);
        EXPECT_EQ(w.holds, ex.verdict.holds);
        EXPECT_EQ(make_certificate(sc.ot, w).root, ex.certificate.root);
    }
}

TEST(Verify, RejectsNonConformingInstances) {
    auto doc = support::load({"nested.mt"});
    EXPECT_THROW(verify(uml2sql::transformation(), *doc.find_instance("nested_src"), uml2sql::s1()), ModelError);
}

TEST(EvalSpec, JoinIsConjunctionAndCommutes) {
    auto doc = support::load({"nested.mt"});
    const auto& ot = *doc.find_transformation("nested");
    const auto& src = *doc.find_instance("nested_src");
    auto ex = execute(ot, src);
    auto tgt = ex.target.unfrozen_copy();
    tgt.set_id(*tgt.find({"V", 10}), 99);
    tgt.freeze();

    const Ladder& t123 = ot.body.rest().right().rest().rest();
    ObjectKey f = *src.find({"F", 7});
    ObjectKey t = *tgt.find({"T", 7});
    auto t12 = t123.left();
    auto t3 = t123.right();
    auto whole = eval_spec(t123, f, t, src, tgt);
    EXPECT_FALSE(whole.holds);
    EXPECT_EQ(whole.holds, eval_spec(t12, f, t, src, tgt).holds && eval_spec(t3, f, t, src, tgt).holds);
    EXPECT_EQ(eval_spec(join(t3, t12), f, t, src, tgt).holds, whole.holds);
    EXPECT_TRUE(eval_spec(t3, f, t, src, tgt).holds);
    EXPECT_TRUE(eval_spec(t12.left(), f, t, src, tgt).holds);
    EXPECT_FALSE(eval_spec(t12.right(), f, t, src, tgt).holds);
    EXPECT_TRUE(cites_only(whole, "H2V"));
}

TEST(EvalSpec, ThrowsOnMistypedPair) {
    auto ot = uml2sql::transformation();
    auto m1 = uml2sql::m1();
    auto s1 = uml2sql::s1();
    EXPECT_THROW(eval_spec(ot.body, *m1.find({"Class", 2}), s1.root_key(), m1, s1), ExecutionError);
}

TEST(EvalSpec, CheckComEvidence) {
    auto ot = uml2sql::transformation();
    auto m1 = uml2sql::m1();
    auto s1 = uml2sql::s1();
    auto c2 = *m1.find({"Class", 2});
    auto t2 = *s1.find({"Table", 2});
    const auto& columns = ot.body.rest();
    auto com = check_com(columns, columns, c2, t2, m1, s1);
    EXPECT_TRUE(com.equal);
    ASSERT_EQ(com.left.size(), 3u);
    EXPECT_EQ(com.left, com.right);
    EXPECT_EQ(com.left[0], (ObjectValue{"Column", 5, {{"isKey", false}}}));

    auto top = check_com(ot.body, ot.body, m1.root_key(), s1.root_key(), m1, s1);
    EXPECT_TRUE(top.equal);
    EXPECT_EQ(top.left.size(), 3u);
}

TEST(Mutation, SuccInjectionIsLocalised) {
    gen::Rng rng(99);
    int cases = 0;
    while (cases < 60) {
        auto sc = gen::scenario(rng);
        auto rungs = gen::exercised_rungs(sc.ot, sc.src);
        auto pick = rungs[std::uniform_int_distribution<std::size_t>(0, rungs.size() - 1)(rng)];
        auto bad = gen::inject_succ(sc.ot, pick);
        ASSERT_TRUE(well_formed(bad).ok());
        auto ex = execute(bad, sc.src);
        auto v = verify(sc.ot, sc.src, ex.target);
        EXPECT_FALSE(v.holds) << pick;
        EXPECT_TRUE(cites_only(v, pick)) << pick;
        ++cases;
    }
}

TEST(Mutation, PreFalseLeavesVacuousNodes) {
    gen::Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        auto sc = gen::scenario(rng);
        auto rungs = gen::exercised_rungs(sc.ot, sc.src);
        rungs.erase(rungs.begin());
        if (rungs.empty()) continue;
        auto pick = rungs[std::uniform_int_distribution<std::size_t>(0, rungs.size() - 1)(rng)];
        auto ot = gen::pre_false(sc.ot, pick);
        auto ex = execute(ot, sc.src);
        const auto& cls = gen::find_rung(ot, pick).tgt_class;
        EXPECT_TRUE(ex.target.objects_of(cls).empty());
        EXPECT_GT(ex.certificate.root.count(CertKind::Vacuous), 0u);
        EXPECT_TRUE(verify(ot, sc.src, ex.target).holds);
    }
}
