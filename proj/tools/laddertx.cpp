// laddertx: run, verify and replay ordered model transformations.
//
// Exit codes: 0 holds/ok, 1 verification failure, 2 usage or parse error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "laddertx.hpp"

using namespace laddertx;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string src, tgt, tx, out, cert;
    std::string format = "text";
    std::optional<std::uint64_t> seed;
    int cases = 200;
    std::vector<std::string> files;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Usage("cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw Usage("cannot write '" + path + "'");
}

/// All named files parsed as one document, so that declarations may refer
/// across files. Diagnostics go to stderr and raise Usage.
Document load(const std::vector<std::string>& paths) {
    std::vector<SourceFile> files;
    for (const auto& p : paths)
        if (!p.empty()) files.push_back({p, read_file(p)});
    auto r = parse_files(files);
    for (const auto& d : r.diagnostics) std::cerr << d.to_string() << "\n";
    if (!r.ok()) throw Usage(std::to_string(r.diagnostics.size()) + " error(s)");
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    return std::move(r.document);
}

const ModelInstance& instance_in(const Document& doc, const std::string& file, const char* flag) {
    const ModelInstance* found = nullptr;
    for (std::size_t i = 0; i < doc.instances.size(); ++i) {
        if (doc.instance_files[i] != file) continue;
        if (found) throw Usage(std::string(flag) + " file '" + file + "' declares more than one instance");
        found = &doc.instances[i];
    }
    if (!found) throw Usage(std::string(flag) + " file '" + file + "' declares no instance");
    return *found;
}

const OrderedTransformation& transformation_in(const Document& doc, const std::string& file) {
    const OrderedTransformation* found = nullptr;
    for (std::size_t i = 0; i < doc.transformations.size(); ++i) {
        if (doc.transformation_files[i] != file) continue;
        if (found) throw Usage("--tx file '" + file + "' declares more than one transformation");
        found = &doc.transformations[i];
    }
    if (!found) throw Usage("--tx file '" + file + "' declares no transformation");
    return *found;
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw Usage(std::string("missing required option ") + flag);
}

void emit_report(const Options& o, const Report& r) {
    if (o.format == "json")
        std::cout << render_json(r);
    else
        std::cout << render_text(r, color_enabled());
}

int cmd_transform(const Options& o) {
    require(o.src, "--src");
    require(o.tx, "--tx");
    auto doc = load({o.tx, o.src});
    const auto& ot = transformation_in(doc, o.tx);
    const auto& src = instance_in(doc, o.src, "--src");
    ExecutionResult ex;
    try {
        ex = execute(ot, src);
    } catch (const RootPreconditionFalse& e) {
        Report r;
        r.command = "transform";
        r.transformation = ot.name;
        r.source = src.name();
        r.holds = true;
        r.unmapped = unmapped_source_classes(ot);
        r.notes.push_back(e.what());
        emit_report(o, r);
        return kOk;
    }
    if (!o.out.empty())
        write_file(o.out, print(ex.target));
    else if (o.format != "json")
        std::cout << print(ex.target);
    if (!o.cert.empty()) write_file(o.cert, serialize(ex.certificate));
    emit_report(o, make_report("transform", ot, src, ex.target, ex.verdict));
    return ex.verdict.holds ? kOk : kFailed;
}

int cmd_verify(const Options& o) {
    require(o.src, "--src");
    require(o.tgt, "--tgt");
    require(o.tx, "--tx");
    auto doc = load({o.tx, o.src, o.tgt});
    const auto& ot = transformation_in(doc, o.tx);
    const auto& src = instance_in(doc, o.src, "--src");
    const auto& tgt = instance_in(doc, o.tgt, "--tgt");
    Verdict v;
    try {
        v = verify(ot, src, tgt);
    } catch (const ModelError& e) {
        throw Usage(e.what());
    }
    if (!o.cert.empty()) write_file(o.cert, serialize(make_certificate(ot, v)));
    emit_report(o, make_report("verify", ot, src, tgt, v));
    return v.holds ? kOk : kFailed;
}

int cmd_replay(const Options& o) {
    require(o.cert, "--cert");
    require(o.src, "--src");
    require(o.tgt, "--tgt");
    require(o.tx, "--tx");
    auto doc = load({o.tx, o.src, o.tgt});
    const auto& ot = transformation_in(doc, o.tx);
    const auto& src = instance_in(doc, o.src, "--src");
    const auto& tgt = instance_in(doc, o.tgt, "--tgt");
    Certificate cert;
    try {
        cert = deserialize(read_file(o.cert));
    } catch (const CertificateFormatError& e) {
        throw Usage(std::string("certificate: ") + e.what());
    }
    auto r = replay(cert, ot, src, tgt);
    if (o.format == "json") {
        nlohmann::ordered_json j{{"command", "replay"}, {"ok", r.ok}, {"path", r.path}, {"diagnostic", r.diagnostic}};
        std::cout << j.dump(2) << "\n";
    } else if (r.ok) {
        std::cout << "replay: OK (" << cert.root.count(CertKind::HoleLeaf) << " hole leaves, "
                  << cert.root.count(CertKind::ComLeaf) << " com leaves re-derived)\n";
    } else {
        std::cout << "replay: REJECTED at " << r.path << ": " << r.diagnostic << "\n";
    }
    return r.ok ? kOk : kFailed;
}

int cmd_demo(const Options& o) {
    auto ot = uml2sql::transformation();
    auto m1 = uml2sql::m1();
    auto ex = execute(ot, m1, "s1");
    std::size_t tables = ex.target.objects_of("Table").size();
    std::size_t columns = 0, keys = 0;
    for (auto c : ex.target.objects_of("Column")) {
        ++columns;
        if (ex.target.object(c).flags.at("isKey")) ++keys;
    }
    std::string summary = std::to_string(tables) + " tables, " + std::to_string(columns) + " columns, " +
                          std::to_string(keys) + " keys";
    if (!o.out.empty()) write_file(o.out, print(ex.target));
    if (!o.cert.empty()) write_file(o.cert, serialize(ex.certificate));
    auto report = make_report("demo", ot, m1, ex.target, ex.verdict);
    if (o.format == "json") {
        auto j = report_json(report);
        j["summary"] = summary;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << print(m1) << "\n" << print(ex.target) << "\n" << summary << "\n";
        std::cout << render_text(report, color_enabled());
    }
    return ex.verdict.holds ? kOk : kFailed;
}

/// Property mode: random scenarios must certify, and a mutated target must not.
int check_properties(const Options& o) {
    gen::Rng rng(*o.seed);
    int agree = 0, rejected = 0;
    for (int i = 0; i < o.cases; ++i) {
        auto sc = gen::scenario(rng);
        auto ex = execute(sc.ot, sc.src);
        bool ok = ex.verdict.holds && verify(sc.ot, sc.src, ex.target).holds;
        agree += ok;
        auto bad = gen::mutate_target(ex.target, rng);
        bool rej = !verify(sc.ot, sc.src, bad.target).holds;
        rejected += rej;
        if (!ok) std::cerr << "case " << i << ": executed target does not verify\n";
        if (!rej) std::cerr << "case " << i << ": mutation not detected: " << bad.description << "\n";
    }
    bool pass = agree == o.cases && rejected == o.cases;
    if (o.format == "json") {
        nlohmann::ordered_json j{{"command", "check"},      {"seed", *o.seed},       {"cases", o.cases},
                                 {"executed_verified", agree}, {"mutations_rejected", rejected}, {"ok", pass}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "check --seed " << *o.seed << ": " << agree << "/" << o.cases << " executed targets verified, "
                  << rejected << "/" << o.cases << " mutated targets rejected\n";
    }
    return pass ? kOk : kFailed;
}

int cmd_check(const Options& o) {
    std::vector<std::string> paths = o.files;
    for (const auto& p : {o.tx, o.src, o.tgt})
        if (!p.empty()) paths.push_back(p);
    if (paths.empty() && !o.seed) throw Usage("check needs input files or --seed");
    int status = kOk;
    if (!paths.empty()) {
        auto doc = load(paths);
        if (o.format == "json") {
            nlohmann::ordered_json j{{"command", "check"},
                                     {"metamodels", doc.metamodels.size()},
                                     {"instances", doc.instances.size()},
                                     {"transformations", doc.transformations.size()}};
            auto unmapped = nlohmann::ordered_json::object();
            for (const auto& t : doc.transformations) unmapped[t.name] = unmapped_source_classes(t);
            j["unmapped_source_classes"] = unmapped;
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << "ok: " << doc.metamodels.size() << " metamodel(s), " << doc.instances.size()
                      << " instance(s), " << doc.transformations.size() << " transformation(s)\n";
            for (const auto& t : doc.transformations) {
                std::cout << "  " << t.name << ": " << to_sexpr(t.body) << "\n    unmapped source classes: ";
                auto u = unmapped_source_classes(t);
                if (u.empty()) std::cout << "none";
                for (std::size_t i = 0; i < u.size(); ++i) std::cout << (i ? ", " : "") << u[i];
                std::cout << "\n";
            }
        }
    }
    if (o.seed) status = check_properties(o);
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verifying engine for ordered model-to-model transformations"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"text", "json"}));
    };
    auto* transform = app.add_subcommand("transform", "Execute a transformation and certify the result");
    transform->add_option("--src", o.src, "Source instance (.mt)");
    transform->add_option("--tx", o.tx, "Transformation (.mt)");
    transform->add_option("--out", o.out, "Write the target instance here instead of stdout");
    transform->add_option("--cert", o.cert, "Write the certificate (JSON) here");
    add_common(transform);

    auto* verify_cmd = app.add_subcommand("verify", "Check a given target against a source");
    verify_cmd->add_option("--src", o.src, "Source instance (.mt)");
    verify_cmd->add_option("--tgt", o.tgt, "Target instance (.mt)");
    verify_cmd->add_option("--tx", o.tx, "Transformation (.mt)");
    verify_cmd->add_option("--cert", o.cert, "Write the witness-search certificate here");
    add_common(verify_cmd);

    auto* replay_cmd = app.add_subcommand("replay", "Re-derive a certificate and compare");
    replay_cmd->add_option("--cert", o.cert, "Certificate (JSON)");
    replay_cmd->add_option("--src", o.src, "Source instance (.mt)");
    replay_cmd->add_option("--tgt", o.tgt, "Target instance (.mt)");
    replay_cmd->add_option("--tx", o.tx, "Transformation (.mt)");
    add_common(replay_cmd);

    auto* demo = app.add_subcommand("demo", "Run the built-in UML to SQL example");
    demo->add_option("--out", o.out, "Write the target instance here");
    demo->add_option("--cert", o.cert, "Write the certificate here");
    add_common(demo);

    auto* check = app.add_subcommand("check", "Parse and validate; with --seed, run random property checks");
    check->add_option("files", o.files, "Documents (.mt)");
    check->add_option("--src", o.src, "Source instance (.mt)");
    check->add_option("--tgt", o.tgt, "Target instance (.mt)");
    check->add_option("--tx", o.tx, "Transformation (.mt)");
    check->add_option("--seed", o.seed, "Seed for the random scenario generator");
    check->add_option("--cases", o.cases, "Number of random scenarios")->check(CLI::PositiveNumber);
    add_common(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*transform) return cmd_transform(o);
        if (*verify_cmd) return cmd_verify(o);
        if (*replay_cmd) return cmd_replay(o);
        if (*demo) return cmd_demo(o);
        return cmd_check(o);
    } catch (const Usage& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ExecutionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailed;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}
