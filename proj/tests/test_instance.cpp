#include <gtest/gtest.h>

#include "laddertx/instance.hpp"
#include "laddertx/uml2sql.hpp"

using namespace laddertx;

namespace {

std::shared_ptr<const Metamodel> mm() {
    return std::make_shared<const Metamodel>(Metamodel{"M",
                                                       "A",
                                                       {{"A", {"f"}, {{"bs", "B", Multiplicity::Many}}},
                                                        {"B", {}, {{"c", "C", Multiplicity::One}}},
                                                        {"C", {}, {}}}});
}

}  // namespace

TEST(Instance, BuildAndNavigate) {
    ModelInstance m(mm(), "m");
    auto a = m.build_object("A", 1, {{"f", true}});
    auto c = m.build_object("C", 9);
    auto b1 = m.build_object("B", 2, {}, {{"c", {c}}});
    auto b2 = m.build_object("B", 3);
    m.set_refs(a, "bs", {b2, b1});

    EXPECT_EQ(m.root_key(), a);
    EXPECT_TRUE(m.object(a).flags.at("f"));
    EXPECT_EQ(m.navigate(a, "bs"), (std::vector<ObjectKey>{b2, b1}));
    EXPECT_EQ(m.navigate_path(a, {"bs", "c"}), (std::vector<ObjectKey>{c}));
    EXPECT_EQ(m.ref(b1).to_string(), "B#2");
    EXPECT_EQ(m.find({"B", 3}), b2);
    EXPECT_FALSE(m.find({"B", 4}));
    EXPECT_EQ(m.objects_of("B"), (std::vector<ObjectKey>{b1, b2}));
    EXPECT_THROW(m.navigate(a, "zz"), ModelError);
    EXPECT_THROW(m.objects_of("Zed"), ModelError);
    EXPECT_TRUE(m.validate().ok());
}

TEST(Instance, FlagsDefaultFalseAndListsEmpty) {
    ModelInstance m(mm());
    auto a = m.build_object("A", 1);
    EXPECT_FALSE(m.object(a).flags.at("f"));
    EXPECT_TRUE(m.object(a).refs.at("bs").empty());
}

TEST(Instance, ConstructionErrors) {
    ModelInstance m(mm());
    auto a = m.build_object("A", 1);
    EXPECT_THROW(m.build_object("A", 1), ModelError);
    EXPECT_THROW(m.build_object("Q", 1), ModelError);
    EXPECT_THROW(m.build_object("A", 2, {{"nope", true}}), ModelError);
    auto c1 = m.build_object("C", 1);
    auto c2 = m.build_object("C", 2);
    EXPECT_THROW(m.build_object("B", 5, {}, {{"c", {c1, c2}}}), ModelError);
    EXPECT_THROW(m.set_refs(a, "bs", {c1}), ModelError);
    EXPECT_THROW(m.set_refs(a, "bs", {a}), ModelError);
    EXPECT_THROW(m.set_id(c1, 2), ModelError);
    EXPECT_THROW(m.set_root(c1), ModelError);
}

TEST(Instance, FrozenInstancesRejectEdits) {
    auto m = uml2sql::m1();
    EXPECT_TRUE(m.frozen());
    EXPECT_THROW(m.build_object("Class", 50), ModelError);
    auto copy = m.unfrozen_copy();
    EXPECT_NO_THROW(copy.build_object("Class", 50));
    EXPECT_FALSE(copy == m);
}

TEST(Instance, EqualityIgnoresConstructionOrder) {
    ModelInstance x(mm(), "m");
    auto a = x.build_object("A", 1);
    auto b2 = x.build_object("B", 2);
    auto b3 = x.build_object("B", 3);
    x.set_refs(a, "bs", {b2, b3});

    ModelInstance y(mm(), "m");
    auto yb3 = y.build_object("B", 3);
    auto yb2 = y.build_object("B", 2);
    auto ya = y.build_object("A", 1, {}, {{"bs", {yb2, yb3}}});
    (void)ya;
    EXPECT_TRUE(x == y);

    y.set_refs(ya, "bs", {yb3, yb2});
    EXPECT_FALSE(x == y) << "list order is significant";
}

TEST(Instance, ValidateFindsUnreachableAndMissingRoot) {
    ModelInstance m(mm(), "m");
    m.build_object("B", 1);
    EXPECT_FALSE(m.validate().ok());
    m.build_object("A", 1);
    auto r = m.validate();
    EXPECT_TRUE(r.ok());
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("B#1"), std::string::npos);
}

TEST(Instance, SharedChildIsValid) {
    ModelInstance m(mm(), "m");
    auto c = m.build_object("C", 1);
    auto b1 = m.build_object("B", 1, {}, {{"c", {c}}});
    auto b2 = m.build_object("B", 2, {}, {{"c", {c}}});
    m.build_object("A", 1, {}, {{"bs", {b1, b2}}});
    EXPECT_TRUE(m.validate().ok());
}

TEST(Instance, ObjectRefParse) {
    EXPECT_EQ(ObjectRef::parse("Table#12"), (ObjectRef{"Table", 12}));
    EXPECT_FALSE(ObjectRef::parse("Table12"));
    EXPECT_FALSE(ObjectRef::parse("#3"));
    EXPECT_FALSE(ObjectRef::parse("T#x"));
    EXPECT_FALSE(ObjectRef::parse("T#"));
}

TEST(Instance, CanonicalKeysSortByClassThenId) {
    auto s = uml2sql::s1();
    std::vector<std::string> refs;
    for (auto k : s.canonical_keys()) refs.push_back(s.ref(k).to_string());
    EXPECT_EQ(refs.front(), "Column#2");
    EXPECT_EQ(refs[6], "Column#8");
    EXPECT_EQ(refs[7], "Schema#1");
    EXPECT_EQ(refs.back(), "Table#4");
}
