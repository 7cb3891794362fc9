#include <gtest/gtest.h>

#include "laddertx/dsl.hpp"
#include "laddertx/generate.hpp"
#include "laddertx/uml2sql.hpp"
#include "support.hpp"

using namespace laddertx;

namespace {

const std::vector<std::vector<std::string>> kFixtures = {
    {"uml2sql.mt"}, {"m1.mt", "uml2sql.mt"}, {"uml2sql.mt", "s1.mt"}, {"uml2sql.mt", "s1_broken.mt"}, {"nested.mt"}};

std::string error_of(std::string_view text) {
    auto r = parse(text, "t.mt");
    if (r.ok()) return "";
    return r.diagnostics.front().to_string();
}

void expect_round_trip(const Document& doc) {
    auto text = print(doc);
    auto again = parse(text, "printed.mt");
    ASSERT_TRUE(again.ok()) << (again.diagnostics.empty() ? "" : again.diagnostics[0].to_string()) << "\n" << text;
    EXPECT_TRUE(again.document == doc) << text;
    EXPECT_EQ(print(again.document), text);
}

const char* kTiny = R"(
metamodel S { root A; class A { rel b : B many; } class B { flag k; } }
metamodel T { root P; class P { rel q : Q many; } class Q { flag k; } }
)";

}  // namespace

TEST(Dsl, FixturesParseAndRoundTrip) {
    for (const auto& files : kFixtures) {
        auto doc = support::load(files);
        expect_round_trip(doc);
    }
}

TEST(Dsl, DataFilesMatchTheProgrammaticBundle) {
    auto doc = support::load({"uml2sql.mt", "m1.mt", "s1.mt"});
    EXPECT_EQ(*doc.find_transformation("uml2sql"), uml2sql::transformation());
    EXPECT_EQ(*doc.find_instance("m1"), uml2sql::m1());
    EXPECT_EQ(*doc.find_instance("s1"), uml2sql::s1());
    EXPECT_EQ(*doc.find_metamodel("UML"), *uml2sql::uml_metamodel());
}

TEST(Dsl, RandomDocumentsRoundTrip) {
    gen::Rng rng(17);
    for (int i = 0; i < 120; ++i) expect_round_trip(gen::document(rng));
}

TEST(Dsl, JoinNestingSurvivesPrinting) {
    auto doc = support::load({"nested.mt"});
    auto text = print(*doc.find_transformation("nested"));
    EXPECT_NE(text.find("join(join(base(G2U"), std::string::npos) << text;
    auto again = parse_or_throw(print(*doc.find_metamodel("Src")) + print(*doc.find_metamodel("Tgt")) + text);
    EXPECT_EQ(*again.find_transformation("nested"), *doc.find_transformation("nested"));
}

TEST(Dsl, CommentsAndOptionalClauses) {
    auto doc = parse_or_throw(std::string(kTiny) + R"(
// whole-line comment
transform t : S -> T {
  rung A2P : A -> P { map { id <- src.id; } }  // trailing
  rung B2Q : B -> Q { post: src.id = tgt.id /\ (src.k = tgt.k); map { id <- src.id; k <- src.k; } }
  ladder: base(B2Q via b / q)
}
)");
    const auto& ot = *doc.find_transformation("t");
    EXPECT_EQ(ot.root_rung.name, "A2P");
    EXPECT_EQ(to_string(ot.root_rung.pre), "true");
    EXPECT_EQ(to_string(ot.root_rung.post), "true");
}

TEST(Dsl, SyntaxErrorsCarryLineAndColumn) {
    EXPECT_EQ(error_of("metamodel S {\n  root A;\n  class A { rel b B many; }\n}"),
              "t.mt:3:19: error: expected ':', found 'B'");
    EXPECT_NE(error_of("metamodel S { root A; class A { } } }").find("t.mt:1:37:"), std::string::npos);
    EXPECT_NE(error_of("instance i : S { A#x { } }").find("t.mt:1:20:"), std::string::npos);
    EXPECT_NE(error_of("@").find("t.mt:1:1:"), std::string::npos);
}

TEST(Dsl, SemanticErrorsCarryLineAndColumn) {
    auto undeclared = error_of("metamodel S {\n  root A;\n  class A { rel b : Nope many; }\n}");
    EXPECT_NE(undeclared.find("t.mt:3:"), std::string::npos) << undeclared;
    EXPECT_NE(undeclared.find("Nope"), std::string::npos);

    auto dangling = error_of(std::string(kTiny) + "instance i : S {\n  A#1 { b=[B#9] }\n}");
    EXPECT_NE(dangling.find("t.mt:5:"), std::string::npos) << dangling;
    EXPECT_NE(dangling.find("B#9"), std::string::npos);

    auto bad_type = error_of(std::string(kTiny) +
                             "transform t : S -> T {\n"
                             "  rung A2P : A -> P { map { id <- src.id; } }\n"
                             "  rung B2Q : B -> Q { post: src.id /\\ true; map { id <- src.id; } }\n"
                             "  ladder: base(B2Q via b / q)\n}");
    EXPECT_NE(bad_type.find("t.mt:6:"), std::string::npos) << bad_type;

    auto bad_nav = error_of(std::string(kTiny) +
                            "transform t : S -> T {\n"
                            "  rung A2P : A -> P { map { id <- src.id; } }\n"
                            "  rung B2Q : B -> Q { map { id <- src.id; } }\n"
                            "  ladder: base(B2Q via zz / q)\n}");
    EXPECT_NE(bad_nav.find("t.mt:7:"), std::string::npos) << bad_nav;
}

TEST(Dsl, ParseOrThrowReportsAllDiagnostics) {
    try {
        parse_or_throw("metamodel S { root Q; }", "x.mt");
        FAIL();
    } catch (const ParseError& e) {
        ASSERT_FALSE(e.diagnostics().empty());
        EXPECT_EQ(e.diagnostics()[0].pos.file, "x.mt");
        EXPECT_EQ(e.diagnostics()[0].pos.line, 1);
    }
}

TEST(Dsl, InstancePrinterPutsRootFirst) {
    auto text = print(uml2sql::s1());
    auto first = text.find('\n') + 1;
    EXPECT_EQ(text.substr(first, 11), "  Schema#1 ");
}
