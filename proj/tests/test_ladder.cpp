#include <gtest/gtest.h>

#include "laddertx/ladder.hpp"
#include "laddertx/uml2sql.hpp"
#include "support.hpp"

using namespace laddertx;

namespace {

struct Nested : ::testing::Test {
    Document doc = support::load({"nested.mt"});
    const OrderedTransformation& ot = *doc.find_transformation("nested");
};

std::vector<std::string> names(const std::vector<Ladder>& bs) {
    std::vector<std::string> out;
    for (const auto& b : bs) out.push_back(b.child().name);
    return out;
}

}  // namespace

TEST_F(Nested, ShapeOfTheNestedLadder) {
    // t7 = step(B2Q, t56); t56 = join(t5, t6); t6 = step(E2S, t4);
    // t4 = step(F2T, t123); t123 = join(join(t1, t2), t3).
    const Ladder& t7 = ot.body;
    ASSERT_EQ(t7.kind(), Ladder::Kind::Step);
    EXPECT_EQ(t7.child().name, "B2Q");
    EXPECT_EQ(t7.index().src_class, "A");

    const Ladder& t56 = t7.rest();
    ASSERT_EQ(t56.kind(), Ladder::Kind::Join);
    EXPECT_EQ(t56.index().src_class, "B");
    const Ladder& t5 = t56.left();
    EXPECT_EQ(t5.kind(), Ladder::Kind::Base);
    EXPECT_EQ(t5.child().name, "D2R");
    EXPECT_EQ(t5.src_nav(), (Navigation{"c", "d"}));

    const Ladder& t4 = t56.right().rest();
    ASSERT_EQ(t4.kind(), Ladder::Kind::Step);
    EXPECT_EQ(t4.child().name, "F2T");

    const Ladder& t123 = t4.rest();
    ASSERT_EQ(t123.kind(), Ladder::Kind::Join);
    ASSERT_EQ(t123.left().kind(), Ladder::Kind::Join);
    EXPECT_EQ(t123.left().left().child().name, "G2U");
    EXPECT_EQ(t123.left().right().child().name, "H2V");
    EXPECT_EQ(t123.right().child().name, "J2W");
    EXPECT_EQ(names(branches(t123)), (std::vector<std::string>{"G2U", "H2V", "J2W"}));
    EXPECT_EQ(t7.node_count(), 10u);
}

TEST_F(Nested, JoinNestingIsPreserved) {
    const Ladder& t123 = ot.body.rest().right().rest().rest();
    EXPECT_EQ(to_sexpr(t123), "(JOIN (JOIN (BASE G2U g/u) (BASE H2V h/v)) (BASE J2W j/w))");
    auto t1 = t123.left().left();
    auto t2 = t123.left().right();
    auto t3 = t123.right();
    EXPECT_EQ(join(join(t1, t2), t3), t123);
    EXPECT_FALSE(join(t1, join(t2, t3)) == t123);
}

TEST_F(Nested, UnmappedClassesAndPreorder) {
    EXPECT_EQ(unmapped_source_classes(ot), (std::vector<std::string>{"C", "I"}));
    std::vector<std::string> order;
    for (const auto& r : ladder_rungs(ot)) order.push_back(r.name);
    EXPECT_EQ(order, (std::vector<std::string>{"A2P", "B2Q", "D2R", "E2S", "F2T", "G2U", "H2V", "J2W"}));
    EXPECT_TRUE(well_formed(ot).ok());
}

TEST_F(Nested, JoinOfDifferentIndicesIsRejected) {
    const Ladder& t56 = ot.body.rest();
    EXPECT_THROW(join(t56, ot.body), LadderError);
    EXPECT_THROW(join(t56.left(), t56.right().rest()), LadderError);
}

TEST(Ladder, CheckedConstructorsValidateHops) {
    auto uml = uml2sql::uml_metamodel();
    auto sql = uml2sql::sql_metamodel();
    auto idx = index_of(uml2sql::class2table());
    auto a2c = uml2sql::attribute2column();
    EXPECT_NO_THROW(base(*uml, *sql, idx, a2c, {"attrs"}, "columns"));
    EXPECT_THROW(base(*uml, *sql, idx, a2c, {"nope"}, "columns"), LadderError);
    EXPECT_THROW(base(*uml, *sql, idx, a2c, {"attrs"}, "tables"), LadderError);
    EXPECT_THROW(base(*uml, *sql, index_of(uml2sql::model2schema()), a2c, {"attrs"}, "columns"), LadderError);

    auto rest = base(*uml, *sql, idx, a2c, {"attrs"}, "columns");
    auto root = index_of(uml2sql::model2schema());
    EXPECT_NO_THROW(step(*uml, *sql, root, uml2sql::class2table(), {"classes"}, "tables", rest));
    // rest must be indexed by the child rung, map included.
    auto other = uml2sql::class2table();
    other.map.emits.clear();
    EXPECT_THROW(step(*uml, *sql, root, other, {"classes"}, "tables", rest), LadderError);
}

TEST(Ladder, MultiplicityMustAgree) {
    auto src = std::make_shared<const Metamodel>(
        Metamodel{"S", "A", {{"A", {}, {{"b", "B", Multiplicity::One}}}, {"B", {}, {}}}});
    auto tgt = std::make_shared<const Metamodel>(
        Metamodel{"T", "P", {{"P", {}, {{"q", "Q", Multiplicity::Many}}}, {"Q", {}, {}}}});
    auto root = copy_id_rung("A2P", "A", "P");
    EXPECT_THROW(base(*src, *tgt, index_of(root), copy_id_rung("B2Q", "B", "Q"), {"b"}, "q"), LadderError);
}

TEST(Ladder, AmbiguousSiblingBranchesAreNotWellFormed) {
    auto src = std::make_shared<const Metamodel>(Metamodel{
        "S", "A", {{"A", {}, {{"b", "B", Multiplicity::Many}, {"c", "C", Multiplicity::Many}}}, {"B", {}, {}}, {"C", {}, {}}}});
    auto tgt = std::make_shared<const Metamodel>(
        Metamodel{"T", "P", {{"P", {}, {{"q", "Q", Multiplicity::Many}}}, {"Q", {}, {}}}});
    OrderedTransformation ot;
    ot.name = "amb";
    ot.src_mm = src;
    ot.tgt_mm = tgt;
    ot.root_rung = copy_id_rung("A2P", "A", "P");
    auto b = base(*src, *tgt, index_of(ot.root_rung), copy_id_rung("B2Q", "B", "Q"), {"b"}, "q");
    auto c = base(*src, *tgt, index_of(ot.root_rung), copy_id_rung("C2Q", "C", "Q"), {"c"}, "q");
    ot.body = join(b, c);
    auto r = well_formed(ot);
    ASSERT_FALSE(r.ok());
    EXPECT_NE(r.to_string().find("both put 'Q' objects into 'q'"), std::string::npos);
    ot.body = b;
    EXPECT_TRUE(well_formed(ot).ok());
}

TEST(Ladder, WellFormedChecksRootRung) {
    auto ot = uml2sql::transformation();
    EXPECT_TRUE(well_formed(ot).ok());
    ot.root_rung = uml2sql::class2table();
    EXPECT_FALSE(well_formed(ot).ok());
}

TEST(Ladder, SubstituteRungRewritesIndices) {
    auto ot = uml2sql::transformation();
    auto r = uml2sql::class2table();
    r.map.assignments[0].value = Expr::succ(Expr::attr(Side::Src, "id"));
    auto changed = substitute_rung(ot, "Class2Table", r);
    EXPECT_TRUE(well_formed(changed).ok());
    EXPECT_EQ(changed.body.child(), r);
    EXPECT_EQ(changed.body.rest().index(), index_of(r));
    EXPECT_EQ(changed.body.rest().child(), ot.body.rest().child());
    EXPECT_THROW(substitute_rung(ot, "Nope", r), LadderError);
}
