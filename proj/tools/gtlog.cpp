// gtlog command-line driver: run, explain, render, bench.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gtlog/engine.hpp"
#include "gtlog/graph_io.hpp"
#include "gtlog/parser.hpp"
#include "gtlog/render.hpp"
#include "gtlog/stdlib.hpp"
#include "gtlog/synthetic.hpp"

namespace fs = std::filesystem;
using namespace gtlog;

namespace {

struct Options {
    std::string program;
    std::vector<std::string> rels;
    std::vector<std::string> as_string;
    std::string out;
    std::string out_dir;
    std::string format;
    std::optional<std::int64_t> depth;
    bool trace = false;
    bool header = false;
    // render
    std::string predicate;
    std::optional<std::string> color_col;
    std::optional<std::string> width_col;
    // bench
    std::size_t triples = 1000000;
    std::size_t branching = 3;
    std::size_t interest = 4;
    std::uint64_t seed = 1;
    std::string write_dir;
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

EvalConfig config_from(const Options& o) {
    EvalConfig c;
    c.depth_override = o.depth;
    if (o.trace) c.trace = &std::cerr;
    if (const char* env = std::getenv("GTLOG_MAX_ITERS")) {
        try {
            c.max_iterations = static_cast<std::size_t>(std::stoull(env));
        } catch (const std::exception&) {
            throw Error(ErrorCode::Parse, std::string("GTLOG_MAX_ITERS is not a number: ") + env);
        }
    }
    return c;
}

/// Loads every --rel binding, shaped by how the program uses the predicate:
/// a predicate used as a function takes its last file column as the value.
std::map<std::string, Relation> load_bindings(const Options& o, const Program& program) {
    Analysis usage = analyze(program, AnalyzeOptions{{}, true});
    LoadOptions load;
    load.header = o.header;
    for (const auto& c : o.as_string) {
        for (const auto& part : split(c, ',')) load.as_string.insert(std::stoul(part));
    }
    std::map<std::string, Relation> out;
    for (const auto& binding : o.rels) {
        auto eq = binding.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw Error(ErrorCode::Parse, "--rel expects Name=path, got '" + binding + "'");
        }
        std::string name = binding.substr(0, eq);
        std::string path = binding.substr(eq + 1);
        Relation raw = load_relation(path, name, std::nullopt, load);
        if (format_for(path) == FileFormat::Json) {
            out.emplace(name, std::move(raw));
            continue;
        }
        auto sig = usage.signatures.find(name);
        RelationSchema schema = raw.schema();
        if (sig != usage.signatures.end()) {
            RelationSchema used = sig->second.schema();
            if (used.arity() == schema.arity() || raw.empty()) {
                schema = used;
            } else if (used.functional && schema.arity() > 0) {
                schema = RelationSchema{schema.arity() - 1, {}, true};
            }
        }
        out.emplace(name, Relation(name, schema, raw.rows()));
    }
    return out;
}

CompiledProgram compile_with(const Program& program, const std::map<std::string, Relation>& data) {
    AnalyzeOptions options;
    for (const auto& [name, rel] : data) options.extensional[name] = rel.schema();
    return compile_program(program, options);
}

FileFormat output_format(const std::string& f) {
    if (f.empty() || f == "csv") return FileFormat::Csv;
    if (f == "tsv") return FileFormat::Tsv;
    if (f == "json") return FileFormat::Json;
    throw Error(ErrorCode::Parse, "unknown format '" + f + "' (csv, tsv or json)");
}

std::string extension(FileFormat f) {
    return f == FileFormat::Csv ? ".csv" : f == FileFormat::Tsv ? ".tsv" : ".json";
}

std::string formatted(const Relation& rel, FileFormat f) {
    return f == FileFormat::Csv ? format_csv(rel) : f == FileFormat::Tsv ? format_tsv(rel) : format_json(rel);
}

int cmd_run(const Options& o) {
    Program program = parse_program(read_text(o.program));
    auto data = load_bindings(o, program);
    CompiledProgram compiled = compile_with(program, data);
    EvalResult result = evaluate(compiled, data, config_from(o));
    std::vector<std::string> names = split(o.out, ',');
    if (names.empty()) {
        for (const auto& [name, sig] : compiled.analysis.signatures) {
            if (sig.is_intensional) names.push_back(name);
        }
    }
    FileFormat format = output_format(o.format);
    for (const auto& name : names) {
        const Relation& rel = query(result, name);
        if (!o.out_dir.empty()) {
            fs::create_directories(o.out_dir);
            export_relation(rel, fs::path(o.out_dir) / (name + extension(format)), format);
        } else {
            if (names.size() > 1) std::cout << "# " << name << '\n';
            std::cout << formatted(rel, format);
        }
    }
    for (const auto& c : result.cliques) {
        std::string preds;
        for (const auto& p : c.predicates) preds += (preds.empty() ? "" : ",") + p;
        std::cerr << "clique " << preds << ": " << to_string(c.termination) << " after " << c.iterations
                  << " iteration(s)\n";
    }
    return 0;
}

int cmd_explain(const Options& o) {
    Program program = parse_program(read_text(o.program));
    std::map<std::string, Relation> data;
    CompiledProgram compiled;
    if (o.rels.empty()) {
        compiled = compile_program(program, AnalyzeOptions{{}, true});
    } else {
        data = load_bindings(o, program);
        compiled = compile_with(program, data);
    }
    std::cout << describe(compiled.analysis);
    for (const auto& [name, plan] : compiled.plans) {
        std::cout << "plan " << name << ":\n";
        std::istringstream lines(explain(plan));
        for (std::string line; std::getline(lines, line);) std::cout << "  " << line << '\n';
        if (auto d = compiled.delta_plans.find(name); d != compiled.delta_plans.end()) {
            std::cout << "delta plan " << name << ":\n";
            std::istringstream dl(explain(d->second));
            for (std::string line; std::getline(dl, line);) std::cout << "  " << line << '\n';
        }
    }
    return 0;
}

int cmd_render(const Options& o) {
    Program program = parse_program(read_text(o.program));
    auto data = load_bindings(o, program);
    CompiledProgram compiled = compile_with(program, data);
    if (!compiled.analysis.signatures.count(o.predicate)) {
        throw Error(ErrorCode::UnknownPredicate, "render predicate " + o.predicate + " is not defined");
    }
    EvalResult result = evaluate(compiled, data, config_from(o));
    auto edges = to_render_edges(query(result, o.predicate), RenderColumns{o.color_col, o.width_col});
    std::string text;
    if (o.format.empty() || o.format == "dot") {
        text = to_dot(std::move(edges));
    } else if (o.format == "json") {
        text = to_json_graph(std::move(edges));
    } else {
        throw Error(ErrorCode::Parse, "unknown render format '" + o.format + "' (dot or json)");
    }
    if (o.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(o.out, std::ios::binary);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + o.out);
        out << text;
    }
    return 0;
}

int cmd_bench(const Options& o) {
    using clock = std::chrono::steady_clock;
    auto ms = [](clock::duration d) { return std::chrono::duration_cast<std::chrono::milliseconds>(d).count(); };
    auto t0 = clock::now();
    TaxonomyFixture fixture = generate_taxonomy(o.triples, o.branching, o.interest, o.seed);
    if (!o.write_dir.empty()) {
        fs::create_directories(o.write_dir);
        export_relation(fixture.triples, fs::path(o.write_dir) / "triples.tsv", FileFormat::Tsv);
        export_relation(fixture.labels, fs::path(o.write_dir) / "labels.tsv", FileFormat::Tsv);
        std::ofstream items(fs::path(o.write_dir) / "interest.tsv");
        for (const auto& v : fixture.interest) items << display(v) << '\n';
    }
    auto t1 = clock::now();
    auto result = stdlib::extract_taxonomy(fixture.triples, fixture.labels, fixture.interest, o.depth.value_or(-1));
    auto t2 = clock::now();
    std::cout << "bench triples=" << fixture.triples.size() << " taxon_edges=" << fixture.taxon_edges
              << " interest=" << fixture.interest.size() << " generate_ms=" << ms(t1 - t0)
              << " eval_ms=" << ms(t2 - t1) << " iterations=" << result.iterations
              << " termination=" << to_string(result.termination) << " edges=" << result.edges.size() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gtlog: evaluate graph transformation rule programs"};
    app.require_subcommand(1);
    Options o;

    auto add_data = [&](CLI::App* cmd) {
        cmd->add_option("program", o.program, "Program file")->required();
        cmd->add_option("--rel", o.rels, "Bind a relation: Name=path (repeatable)");
        cmd->add_flag("--header", o.header, "Input files start with a header row");
        cmd->add_option("--as-string", o.as_string, "Zero-based input columns kept as strings");
        cmd->add_option("--depth", o.depth, "Iteration cap for every recursive clique (-1 = unbounded)");
        cmd->add_flag("--trace", o.trace, "Print per-iteration row counts to stderr");
    };

    auto* run = app.add_subcommand("run", "Evaluate a program and print or write relations");
    add_data(run);
    run->add_option("--out", o.out, "Comma-separated relations to output (default: all derived)");
    run->add_option("--out-dir", o.out_dir, "Write one file per relation here instead of stdout");
    run->add_option("--format", o.format, "csv, tsv or json");

    auto* explain_cmd = app.add_subcommand("explain", "Print strata, cliques and plans");
    explain_cmd->add_option("program", o.program, "Program file")->required();
    explain_cmd->add_option("--rel", o.rels, "Bind a relation: Name=path (repeatable)");
    explain_cmd->add_flag("--header", o.header, "Input files start with a header row");

    auto* render = app.add_subcommand("render", "Evaluate and export an edge relation as DOT or JSON");
    add_data(render);
    render->add_option("--pred", o.predicate, "Relation to render")->required();
    render->add_option("--format", o.format, "dot or json");
    render->add_option("--out", o.out, "Output file (default: stdout)");
    render->add_option("--color-col", o.color_col, "Column holding the edge color");
    render->add_option("--width-col", o.width_col, "Column holding the edge width");

    auto* bench = app.add_subcommand("bench", "Run taxonomy extraction on a synthetic triple store");
    bench->add_option("--triples", o.triples, "Number of triples");
    bench->add_option("--branching", o.branching, "Taxonomy branching factor");
    bench->add_option("--interest", o.interest, "Number of items of interest");
    bench->add_option("--seed", o.seed, "Generator seed");
    bench->add_option("--depth", o.depth, "Iteration cap (-1 = unbounded)");
    bench->add_option("--write", o.write_dir, "Also write the generated files to this directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) return cmd_run(o);
        if (explain_cmd->parsed()) return cmd_explain(o);
        if (render->parsed()) return cmd_render(o);
        if (bench->parsed()) return cmd_bench(o);
    } catch (const Error& e) {
        std::cerr << "gtlog: " << (o.program.empty() ? "" : o.program + ": ") << e.what() << '\n';
        return is_program_error(e.code()) ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "gtlog: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
