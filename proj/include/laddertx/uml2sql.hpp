#ifndef LADDERTX_UML2SQL_HPP
#define LADDERTX_UML2SQL_HPP

// The UML-to-SQL example built in code. data/uml2sql.mt, data/m1.mt and
// data/s1.mt describe the same objects in the DSL.
//
// Ids follow the key columns: the first class is Class#2 and its table
// Table#2, matching Column#2.

#include <memory>
#include <string>

#include "laddertx/contracts.hpp"
#include "laddertx/instance.hpp"
#include "laddertx/ladder.hpp"
#include "laddertx/metamodel.hpp"

namespace laddertx::uml2sql {

inline std::shared_ptr<const Metamodel> uml_metamodel() {
    return std::make_shared<const Metamodel>(Metamodel{
        "UML",
        "Model",
        {
            {"Model", {}, {{"classes", "Class", Multiplicity::Many}}},
            {"Class", {}, {{"attrs", "Attribute", Multiplicity::Many}}},
            {"Attribute", {}, {}},
        }});
}

inline std::shared_ptr<const Metamodel> sql_metamodel() {
    return std::make_shared<const Metamodel>(Metamodel{
        "SQL",
        "Schema",
        {
            {"Schema", {}, {{"tables", "Table", Multiplicity::Many}}},
            {"Table", {}, {{"columns", "Column", Multiplicity::Many}}},
            {"Column", {"isKey"}, {}},
        }});
}

inline Rung model2schema() { return copy_id_rung("Model2Schema", "Model", "Schema"); }

/// Class to Table; the emitted first column is the table's key.
inline Rung class2table() {
    Rung r = copy_id_rung("Class2Table", "Class", "Table");
    MapExpr key{"Column",
                {{kBaseAttribute, Expr::attr(Side::Src, kBaseAttribute)}, {"isKey", Expr::boolean(true)}},
                {}};
    r.map.emits.push_back({"columns", Placement::First, key});
    return r;
}

inline Rung attribute2column() {
    Rung r = copy_id_rung("Attribute2Column", "Attribute", "Column");
    r.post = Expr::conj(r.post, Expr::negate(Expr::attr(Side::Tgt, "isKey")));
    r.map.assignments.push_back({"isKey", Expr::boolean(false)});
    return r;
}

inline OrderedTransformation transformation() {
    OrderedTransformation ot;
    ot.name = "uml2sql";
    ot.src_mm = uml_metamodel();
    ot.tgt_mm = sql_metamodel();
    ot.root_rung = model2schema();
    ot.rungs = {model2schema(), class2table(), attribute2column()};
    auto columns = base(*ot.src_mm, *ot.tgt_mm, index_of(class2table()), attribute2column(), {"attrs"}, "columns");
    ot.body = step(*ot.src_mm, *ot.tgt_mm, index_of(ot.root_rung), class2table(), {"classes"}, "tables", columns);
    return ot;
}

/// m1: Model#1 with classes 2, 3, 4 holding attributes {5, 6, 7}, {8}, {}.
inline ModelInstance m1() {
    ModelInstance m(uml_metamodel(), "m1");
    auto model = m.build_object("Model", 1);
    std::vector<ObjectKey> classes;
    for (auto [cid, attrs] : std::vector<std::pair<Nat, std::vector<Nat>>>{{2, {5, 6, 7}}, {3, {8}}, {4, {}}}) {
        std::vector<ObjectKey> keys;
        for (Nat a : attrs) keys.push_back(m.build_object("Attribute", a));
        classes.push_back(m.build_object("Class", cid, {}, {{"attrs", keys}}));
    }
    m.set_refs(model, "classes", classes);
    m.freeze();
    return m;
}

/// s1: the schema the transformation produces from m1.
inline ModelInstance s1() {
    ModelInstance s(sql_metamodel(), "s1");
    auto schema = s.build_object("Schema", 1);
    std::vector<ObjectKey> tables;
    for (auto [tid, cols] : std::vector<std::pair<Nat, std::vector<Nat>>>{{2, {5, 6, 7}}, {3, {8}}, {4, {}}}) {
        std::vector<ObjectKey> keys{s.build_object("Column", tid, {{"isKey", true}})};
        for (Nat c : cols) keys.push_back(s.build_object("Column", c, {{"isKey", false}}));
        tables.push_back(s.build_object("Table", tid, {}, {{"columns", keys}}));
    }
    s.set_refs(schema, "tables", tables);
    s.freeze();
    return s;
}

}  // namespace laddertx::uml2sql

#endif
