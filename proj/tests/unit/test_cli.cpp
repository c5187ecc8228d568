#include <catch_amalgamated.hpp>

#include <loewner/cli.hpp>

#include <filesystem>
#include <sstream>

using namespace loewner;
using io::Json;

#ifndef LOEWNER_DATA_DIR
#error "LOEWNER_DATA_DIR must point at examples/data"
#endif

namespace {

std::string data(const std::string& name) { return std::string(LOEWNER_DATA_DIR) + "/" + name; }

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run_cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "loewner_cli");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string schema_pointer(const Json& j, Json (*loader)(const Json&))
{
    try {
        loader(j);
    } catch (const io::SchemaError& e) {
        return e.pointer();
    }
    return "<none>";
}

Json load_sf(const Json& j) { return io::to_json(io::sampled_function_from_json(j)); }
Json load_real(const Json& j) { return io::to_json(io::realization_from_json(j)); }

std::filesystem::path temp_path(const std::string& name) { return std::filesystem::temp_directory_path() / ("loewner_test_" + name); }

} // namespace

TEST_CASE("canonical dump formatting", "[io]")
{
    const Json j = {{"b", 0.1}, {"a", Json::array({1, 2.5, -0.0})}, {"c", {{"z", true}, {"y", nullptr}}}};
    const std::string text = io::canonical_dump(j);
    CHECK(text == "{\n  \"a\": [1, 2.5, 0],\n  \"b\": 0.10000000000000001,\n  \"c\": {\n    \"y\": null,\n    \"z\": true\n  }\n}\n");
    CHECK(io::canonical_dump(io::parse_json(text)) == text);
    CHECK(io::detail::format_double(std::numeric_limits<double>::infinity()) == "null");
}

TEST_CASE("sampled functions round-trip", "[io]")
{
    const Json minimal = {{"d", 1}, {"nodes", Json::array({{{"x", {0.5}}, {"f", 1.0 / 3.0}, {"grad", {2.0}}}})}};
    const auto sf = io::sampled_function_from_json(minimal);
    CHECK(sf.n() == 1);
    const std::string once = io::canonical_dump(io::to_json(sf));
    const std::string twice = io::canonical_dump(io::to_json(io::sampled_function_from_json(io::parse_json(once))));
    CHECK(once == twice);

    for (const char* name : {"affine.json", "xy.json", "sqrt.json", "neg_inv.json", "square.json"}) {
        const auto f = io::load_sampled_function(data(name));
        const std::string a = io::canonical_dump(io::to_json(f));
        CHECK(io::canonical_dump(io::to_json(io::sampled_function_from_json(io::parse_json(a)))) == a);
    }
}

TEST_CASE("realizations load and round-trip", "[io]")
{
    const auto tr = io::load_realization(data("bidisk_product.json"));
    REQUIRE(std::holds_alternative<TransferRealization>(tr));
    CHECK(std::get<TransferRealization>(tr).unitary_flag);
    CHECK(std::get<TransferRealization>(tr).unitarity_defect() <= 1e-15);

    const auto cr = io::load_realization(data("cauchy_swap.json"));
    REQUIRE(std::holds_alternative<CauchyRealization>(cr));
    Vector z(2);
    z << cplx(0.1, 0.5), cplx(-0.2, 1.0);
    // -z2 / (z1 z2 - 1)
    CHECK(std::abs(eval_cauchy(std::get<CauchyRealization>(cr), z) - (-z(1) / (z(0) * z(1) - 1.0))) <= 1e-14);

    for (const auto& r : {tr, cr}) {
        const std::string a = io::canonical_dump(io::to_json(r));
        CHECK(io::canonical_dump(io::to_json(io::realization_from_json(io::parse_json(a)))) == a);
    }

    // a flagged-unitary block that is only a contraction
    Json bad = io::read_json_file(data("bidisk_product.json"));
    bad["D"][1][0] = {0.5, 0.0};
    CHECK_THROWS_AS(io::realization_from_json(bad), Error);
    bad["unitary_flag"] = false;
    CHECK_NOTHROW(io::realization_from_json(bad));
}

TEST_CASE("schema errors carry the pointer of the first violation", "[io]")
{
    Json j = io::read_json_file(data("bidisk_product.json"));
    j["beta"][1] = {1};
    CHECK(schema_pointer(j, load_real) == "/beta/1");

    j = io::read_json_file(data("cauchy_swap.json"));
    j["X"][0][1] = "one";
    CHECK(schema_pointer(j, load_real) == "/X/0/1");
    j = io::read_json_file(data("cauchy_swap.json"));
    j.erase("C");
    CHECK(schema_pointer(j, load_real) == "/C");
    j = io::read_json_file(data("cauchy_swap.json"));
    j["kind"] = "rational";
    CHECK(schema_pointer(j, load_real) == "/kind");
    j = io::read_json_file(data("cauchy_swap.json"));
    j["v1"] = Json::array({{1, 0}});
    CHECK(schema_pointer(j, load_real) == "/v1");

    j = io::read_json_file(data("xy.json"));
    j["nodes"][1]["grad"] = {1.0};
    CHECK(schema_pointer(j, load_sf) == "/nodes/1/grad");
    j = io::read_json_file(data("xy.json"));
    j["d"] = 1.5;
    CHECK(schema_pointer(j, load_sf) == "/d");

    CHECK_THROWS_AS(io::parse_json("{\"d\": "), io::SchemaError);
}

TEST_CASE("measures round-trip", "[io]")
{
    const auto dm = io::load_measure(data("measure_circle.json"));
    CHECK(dm.support == MeasureSupport::Circle);
    CHECK(dm.atoms.size() == 40);
    const std::string a = io::canonical_dump(io::to_json(dm));
    CHECK(io::canonical_dump(io::to_json(io::measure_from_json(io::parse_json(a)))) == a);
    Json bad = io::parse_json(a);
    bad["atoms"][3]["mass"] = -1.0;
    try {
        io::measure_from_json(bad);
        FAIL("negative mass accepted");
    } catch (const io::SchemaError& e) {
        CHECK(e.pointer() == "/atoms/3/mass");
    }
}

TEST_CASE("cli exit codes on the canonical inputs", "[cli]")
{
    const auto affine = run_cli({"certify", "--input", data("affine.json")});
    REQUIRE(affine.code == 0);
    const Json a = io::parse_json(affine.out);
    CHECK(a["status"] == "certified");
    for (const auto& A : a["certificate"]["A"])
        for (const auto& row : A)
            for (const auto& z : row) CHECK(std::abs(z[0].get<double>() - 1.0) + std::abs(z[1].get<double>()) <= 1e-12);

    const auto xy = run_cli({"certify", "--input", data("xy.json")});
    REQUIRE(xy.code == 2);
    const Json x = io::parse_json(xy.out);
    CHECK(x["status"] == "refuted");
    CHECK_THAT(x["refutation"]["raw_min_eig"].get<double>(), Catch::Matchers::WithinAbs(-3.0, 1e-9));
    CHECK(x["refutation"]["witness_min_eig"].get<double>() < 0.0);

    const auto geo = run_cli({"fuzz", "--mode", "geomean", "--s", "0.5", "--trials", "200", "--seed", "7"});
    REQUIRE(geo.code == 0);
    const Json g = io::parse_json(geo.out);
    CHECK(g["worst_violation"].get<double>() >= -1e-8);
    CHECK(g["passes"] == 200);
}

TEST_CASE("cli inconclusive and error paths", "[cli]")
{
    // x1 x2 at (1,1), (2, 1 + 1e-8): on the boundary of feasibility
    const auto inc = run_cli({"certify", "--input", data("xy_boundary.json")});
    CHECK(inc.code == 3);
    CHECK(io::parse_json(inc.out)["status"] == "inconclusive");

    CHECK(run_cli({"fuzz", "--mode", "geomean"}).code == 1); // --seed is mandatory
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"certify"}).code == 1);
    CHECK(run_cli({"certify", "--input", "/nonexistent.json"}).code == 1);
    CHECK(run_cli({"fuzz", "--seed", "1", "--box", "0,1;2"}).code == 1);
    CHECK(run_cli({"fuzz", "--seed", "1", "--mode", "sideways"}).code == 1);
    const auto bad_schema = run_cli({"certify", "--input", data("cauchy_swap.json")});
    CHECK(bad_schema.code == 1);
    CHECK(bad_schema.err.find("SchemaError") != std::string::npos);
    CHECK(bad_schema.out.empty());
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("cli eval, synth and report", "[cli]")
{
    const auto ev = run_cli({"eval", "--input", data("cauchy_swap.json"), "--point", "0.1,0.5;-0.2,1", "--tuple", data("tuple.json")});
    REQUIRE(ev.code == 0);
    const Json e = io::parse_json(ev.out);
    CHECK(e["values"][0]["pick"] == true);
    CHECK(e["tuple_value"]["hermitian_defect"].get<double>() <= 1e-12);
    CHECK(run_cli({"eval", "--input", data("bidisk_product.json"), "--point", "0.5,0;0.2,0.3"}).code == 0);
    CHECK(run_cli({"eval", "--input", data("bidisk_product.json"), "--point", "1.5,0;0.2,0.3"}).code == 1);
    CHECK(run_cli({"eval", "--input", data("cauchy_swap.json")}).code == 1);

    const auto sy = run_cli({"synth", "--input", data("bidisk_product.json"), "--tau", "0,1"});
    REQUIRE(sy.code == 0);
    const Json s = io::parse_json(sy.out);
    CHECK(s["max_synthesis_residual"].get<double>() <= 1e-8);
    CHECK(s["max_reduction_residual"].get<double>() <= 1e-8);
    // the emitted realizations load back
    CHECK(std::holds_alternative<CauchyRealization>(io::realization_from_json(s["cauchy"])));
    CHECK(std::holds_alternative<SelfAdjointRealization>(io::realization_from_json(s["selfadjoint"])));
    CHECK(run_cli({"synth", "--input", data("cauchy_swap.json")}).code == 1);

    const auto path = temp_path("report.json");
    REQUIRE(run_cli({"certify", "--input", data("xy.json"), "--out", path.string()}).code == 2);
    const auto rep = run_cli({"report", "--input", path.string()});
    CHECK(rep.code == 2);
    CHECK(rep.out == io::canonical_dump(io::read_json_file(path.string())));
    std::filesystem::remove(path);
}

TEST_CASE("fuzz reports are byte-identical across runs", "[cli]")
{
    for (const char* mode : {"global", "local", "path"}) {
        const std::vector<std::string> args = {"fuzz", "--mode", mode, "--trials", "20", "--seed", "12345"};
        const auto a = run_cli(args);
        const auto b = run_cli(args);
        CHECK(a.code == 0);
        CHECK(a.out == b.out);
    }
    const auto x1 = run_cli({"fuzz", "--function", "xy", "--trials", "50", "--seed", "3"});
    const auto x2 = run_cli({"fuzz", "--function", "xy", "--trials", "50", "--seed", "3"});
    CHECK(x1.code == 2);
    CHECK(x1.out == x2.out);
    const auto other = run_cli({"fuzz", "--function", "xy", "--trials", "50", "--seed", "4"});
    CHECK(other.out != x1.out);

    // a realization file drives global trials
    const auto rf = run_cli({"fuzz", "--input", data("cauchy_swap.json"), "--trials", "20", "--seed", "5"});
    CHECK(rf.code == 0);
    CHECK(io::parse_json(rf.out)["function"] == "realization");
}
