#include "gen.hpp"

#include "nsci/config.hpp"
#include "nsci/errors.hpp"
#include "nsci/io.hpp"
#include "nsci/manifest.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nsci;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("nsci_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}
std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}
}  // namespace

TEST_SUITE("io") {

TEST_CASE("field container round trip") {
    const fs::path dir = scratch("raw");
    const Grid g = make_grid(8);
    test::for_all(5, 40, [&](test::Gen& gen) {
        const SymTensorField R = gen.field<6>(g, 3);
        write_raw(dir / "R.nsf", to_raw(R, 3, 0.25));
        const RawField back = read_raw(dir / "R.nsf");
        CHECK(back.n == 8);
        CHECK(back.components == 6);
        CHECK(back.time_index == 3);
        CHECK(back.time == 0.25);
        const SymTensorField R2 = from_raw<6>(back);
        CHECK(l2_parseval(R - R2) < 1e-14 * l2_parseval(R));
    });
    const std::string bytes = slurp(dir / "R.nsf");
    CHECK(bytes.substr(0, 8) == "NSCIFLD1");
    CHECK(bytes.size() == 8 + 4 + 4 + 4 + 8 + 8 * 512 * 6);
    CHECK(static_cast<unsigned char>(bytes[8]) == 8);  // little-endian n
    CHECK_THROWS_AS(from_raw<3>(read_raw(dir / "R.nsf")), Error);
}

TEST_CASE("corrupt containers are rejected") {
    const fs::path dir = scratch("bad");
    {
        std::ofstream os(dir / "x.nsf", std::ios::binary);
        os << "NOTAFILE........";
    }
    CHECK_THROWS_AS(read_raw(dir / "x.nsf"), Error);
    write_raw(dir / "y.nsf", to_raw(random_field<3>(make_grid(8), 2, 1), 0, 0.0));
    const std::string bytes = slurp(dir / "y.nsf");
    {
        std::ofstream os(dir / "y.nsf", std::ios::binary);
        os << bytes.substr(0, bytes.size() - 8);
    }
    CHECK_THROWS_AS(read_raw(dir / "y.nsf"), Error);
    CHECK_THROWS_AS(read_raw(dir / "missing.nsf"), Error);
}

TEST_CASE("slices") {
    const Grid g = make_grid(8);
    const std::string csv = slice_csv(random_field<3>(g, 2, 1), 2, 3);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == "i,j,x_i,x_j,c0,c1,c2");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 64);
    CHECK_THROWS_AS(slice_csv(random_field<1>(g, 2, 1), 3, 0), Error);
}

TEST_CASE("state directories round trip") {
    const fs::path dir = scratch("state");
    const ParameterConfig c;
    const DirectionSet set = build_direction_set();
    const NSRState st = shear_flow_state(c, make_grid(8), 5, set);
    write_state(dir, st);
    const std::vector<Snapshot> back = read_samples(dir, st.grid, st.times);
    REQUIRE(back.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(l2_parseval(back[std::size_t(i)].v - st.at(i).v) < 1e-14);
}

TEST_CASE("run configuration") {
    const RunConfig a = parse_run_config("[params]\neps = 2000\n[grid]\nn = 32\nnt = 9\n[energy]\nslope_factor = 3\n"
                                         "[sweep]\nsigma = 4, 6, 8\n",
                                         false);
    CHECK(a.params.eps == 2000);
    CHECK(a.n == 32);
    CHECK(a.n_given);
    CHECK(a.nt == 9);
    REQUIRE(a.slope_factor);
    CHECK(*a.slope_factor == 3);
    REQUIRE(a.sweep_lambdas.size() == 3);
    CHECK(a.sweep_lambdas[0] == doctest::Approx(2 * std::numbers::pi * 16384));
    const RunConfig b = parse_run_config(R"({"grid": {"n": 16}, "run": {"seed": 7}})", true);
    CHECK(b.n == 16);
    CHECK(b.seed == 7);
    CHECK_FALSE(b.slope_factor);
    auto kind_of = [](const std::string& text, bool json) {
        try {
            parse_run_config(text, json);
        } catch (const Error& e) {
            return e.kind();
        }
        return std::string("none");
    };
    CHECK(kind_of("[grid\n", false) == err::config);
    CHECK(kind_of("[grid]\nbogus = 1\n", false) == err::config);
    CHECK(kind_of("[grid]\nn = 12\n", false) == err::config);
    CHECK(kind_of("[grid]\nn = sixty\n", false) == err::config);
    CHECK(kind_of("[tolerances]\nresidual = -1\n", false) == err::config);
    CHECK(kind_of("[scenario]\nname = from-file\npath = /nonexistent\n", false) == err::config);
    CHECK(kind_of("{\"grid\": 3}", true) == err::config);
    CHECK(kind_of("{", true) == err::config);
    CHECK(to_json(a).dump() == to_json(a).dump());
}

TEST_CASE("checksums and manifests") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const fs::path dir = scratch("manifest");
    write_text(dir / "a.txt", "hello\n");
    const nlohmann::json m = make_manifest(dir, {{"k", 1}}, "test", {dir / "a.txt"}, {{"x", true}}, utc_now());
    CHECK(m.at("files").size() == 1);
    CHECK(m.at("files")[0].at("path") == "a.txt");
    CHECK(verify_manifest(dir, m).ok());
    write_text(dir / "a.txt", "changed\n");
    CHECK(verify_manifest(dir, m).mismatched.size() == 1);
    fs::remove(dir / "a.txt");
    CHECK(verify_manifest(dir, m).missing.size() == 1);
}

}
