#include <gtest/gtest.h>

#include "laddertx/metamodel.hpp"
#include "laddertx/uml2sql.hpp"

using namespace laddertx;

namespace {

bool mentions(const ValidationReport& r, const std::string& needle) {
    for (const auto& v : r.violations)
        if ((v.subject + ": " + v.message).find(needle) != std::string::npos) return true;
    return false;
}

Metamodel tree() {
    return {"M",
            "A",
            {{"A", {"f"}, {{"bs", "B", Multiplicity::Many}}},
             {"B", {}, {{"c", "C", Multiplicity::One}}},
             {"C", {}, {}}}};
}

}  // namespace

TEST(Metamodel, ExampleMetamodelsAreValid) {
    EXPECT_TRUE(validate_metamodel(*uml2sql::uml_metamodel()).ok());
    EXPECT_TRUE(validate_metamodel(*uml2sql::sql_metamodel()).ok());
    EXPECT_TRUE(validate_metamodel(tree()).ok());
}

TEST(Metamodel, ContainmentOrderListsCoveringPairs) {
    using P = std::pair<std::string, std::string>;
    EXPECT_EQ(containment_order(*uml2sql::uml_metamodel()), (std::vector<P>{{"Model", "Class"}, {"Class", "Attribute"}}));
    EXPECT_EQ(containment_order(tree()), (std::vector<P>{{"A", "B"}, {"B", "C"}}));
}

TEST(Metamodel, SharedContainmentTargetIsAllowed) {
    Metamodel m{"M",
                "A",
                {{"A", {}, {{"b", "B", Multiplicity::Many}, {"c", "C", Multiplicity::Many}}},
                 {"B", {}, {{"d", "D", Multiplicity::Many}}},
                 {"C", {}, {{"d", "D", Multiplicity::Many}}},
                 {"D", {}, {}}}};
    EXPECT_TRUE(validate_metamodel(m).ok());
    EXPECT_EQ(containment_order(m).size(), 4u);
}

TEST(Metamodel, CycleIsRejected) {
    auto m = tree();
    m.classes[2].relationships.push_back({"back", "B", Multiplicity::Many});
    auto r = validate_metamodel(m);
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(mentions(r, "containment cycle at B"));
    EXPECT_THROW(containment_order(m), ModelError);
}

TEST(Metamodel, SelfContainmentIsACycle) {
    auto m = tree();
    m.classes[1].relationships.push_back({"self", "B", Multiplicity::Many});
    EXPECT_TRUE(mentions(validate_metamodel(m), "containment cycle"));
}

TEST(Metamodel, NameRules) {
    auto dup_class = tree();
    dup_class.classes.push_back({"C", {}, {}});
    EXPECT_TRUE(mentions(validate_metamodel(dup_class), "duplicate class name"));

    auto dup_flag = tree();
    dup_flag.classes[0].flags.push_back("f");
    EXPECT_TRUE(mentions(validate_metamodel(dup_flag), "duplicate flag name"));

    auto id_flag = tree();
    id_flag.classes[0].flags.push_back("id");
    EXPECT_TRUE(mentions(validate_metamodel(id_flag), "base attribute"));

    auto clash = tree();
    clash.classes[0].relationships.push_back({"f", "C", Multiplicity::Many});
    EXPECT_TRUE(mentions(validate_metamodel(clash), "clashes with a flag"));

    auto undeclared = tree();
    undeclared.classes[1].relationships.push_back({"x", "Nope", Multiplicity::Many});
    EXPECT_TRUE(mentions(validate_metamodel(undeclared), "'Nope' is not declared"));
}

TEST(Metamodel, RootRules) {
    auto no_root = tree();
    no_root.root_class = "Z";
    EXPECT_TRUE(mentions(validate_metamodel(no_root), "root class is not declared"));

    auto contained_root = tree();
    contained_root.classes[2].relationships.push_back({"a", "A", Multiplicity::One});
    EXPECT_TRUE(mentions(validate_metamodel(contained_root), "is the target of a relationship"));
}

TEST(Metamodel, UnreachableClassIsOnlyAWarning) {
    auto m = tree();
    m.classes.push_back({"Lonely", {}, {}});
    auto r = validate_metamodel(m);
    EXPECT_TRUE(r.ok());
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("Lonely"), std::string::npos);
}

TEST(Metamodel, Lookup) {
    auto m = tree();
    EXPECT_NE(m.find_class("B"), nullptr);
    EXPECT_EQ(m.find_class("Q"), nullptr);
    EXPECT_THROW(m.get_class("Q"), ModelError);
    EXPECT_EQ(m.get_class("B").find_relationship("c")->multiplicity, Multiplicity::One);
    EXPECT_TRUE(m.get_class("A").has_flag("f"));
    EXPECT_FALSE(m.get_class("A").has_flag("g"));
}
