#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "curvot/errors.hpp"
#include "curvot/io.hpp"
#include "curvot/synthetic.hpp"
#include "doctest.h"

using namespace curvot;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("curvot_test_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("image_to_diracs grid convention") {
    io::GrayImage img;
    img.width = 2;
    img.height = 2;
    img.maxval = 255;
    img.pixels = {0, 255, 255, 0};
    auto mu = io::image_to_diracs(img, io::IntensityMode::bright, 0.0);
    REQUIRE(mu.size() == 2);
    CHECK(mu.positions[0][0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(mu.positions[0][1] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(mu.positions[1][0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(mu.positions[1][1] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(mu.masses[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(mu.masses[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("constant image gives uniform masses inside the unit square") {
    io::GrayImage img;
    img.width = 5;
    img.height = 3;
    img.maxval = 255;
    img.pixels.assign(15, 100.0);
    auto mu = io::image_to_diracs(img, io::IntensityMode::bright, 0.0);
    REQUIRE(mu.size() == 15);
    double total = 0.0;
    for (int i = 0; i < mu.size(); ++i) {
        total += mu.masses[i];
        CHECK(mu.masses[i] == doctest::Approx(1.0 / 15).epsilon(1e-12));
        CHECK(mu.positions[i][0] > 0.0);
        CHECK(mu.positions[i][0] < 1.0);
        CHECK(mu.positions[i][1] > 0.0);
        CHECK(mu.positions[i][1] < 1.0);
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    img.pixels.assign(15, 255.0);  // fully bright image has no dark mass
    CHECK_THROWS_AS(io::image_to_diracs(img, io::IntensityMode::dark, 0.0), ZeroTotalMass);
}

TEST_CASE("pgm reading, ascii and binary") {
    TempDir tmp;
    write(tmp.file("a.pgm"), "P2\n# comment\n2 2\n255\n0 255\n255 0\n");
    auto a = io::read_pgm(tmp.file("a.pgm"));
    CHECK(a.width == 2);
    CHECK(a.at(0, 1) == 255.0);

    std::string bin = "P5\n2 2\n255\n";
    bin.push_back('\x00');
    bin.push_back('\x7f');
    bin.push_back('\xff');
    bin.push_back('\x01');
    write(tmp.file("b.pgm"), bin);
    auto b = io::read_pgm(tmp.file("b.pgm"));
    CHECK(b.at(0, 0) == 0.0);
    CHECK(b.at(0, 1) == 127.0);
    CHECK(b.at(1, 0) == 255.0);
    CHECK(b.at(1, 1) == 1.0);

    CHECK_THROWS_AS(io::read_pgm(tmp.file("missing.pgm")), IoError);
}

TEST_CASE("catalog loading") {
    TempDir tmp;
    SUBCASE("no mass column defaults to uniform") {
        write(tmp.file("c.csv"), "0.1,0.2\n0.3,0.4\n0.5,0.6\n");
        auto mu = io::load_catalog<2>(tmp.file("c.csv"));
        REQUIRE(mu.size() == 3);
        for (double m : mu.masses) CHECK(m == doctest::Approx(1.0 / 3).epsilon(1e-14));
    }
    SUBCASE("mass column is honored and normalized") {
        write(tmp.file("c.csv"), "x,y,mass\n0.1,0.2,2\n0.3,0.4,2\n0.5,0.6,4\n");
        auto mu = io::load_catalog<2>(tmp.file("c.csv"));
        CHECK(mu.masses[0] == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(mu.masses[2] == doctest::Approx(0.5).epsilon(1e-14));
    }
    SUBCASE("malformed rows report their line number") {
        write(tmp.file("c.csv"), "0.1,0.2\nnope,0.4\n");
        try {
            io::load_catalog<2>(tmp.file("c.csv"));
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == 2);
        }
    }
    SUBCASE("3d catalog with header") {
        write(tmp.file("c.csv"), "x,y,z\n0,0,0\n1,1,1\n");
        auto mu = io::load_catalog<3>(tmp.file("c.csv"));
        REQUIRE(mu.size() == 2);
        CHECK(mu.positions[1][2] == 1.0);
    }
}

TEST_CASE("polyline json round trip is exact") {
    TempDir tmp;
    auto nu = random_walk_polyline<2>(17, 5, 0.1);
    nu.densities[3] = 0.0;  // exercise a chain break
    io::write_polyline_json(nu, tmp.file("p.json"));
    auto back = io::read_polyline_json<2>(tmp.file("p.json"));
    REQUIRE(back.vertices.size() == nu.vertices.size());
    for (std::size_t v = 0; v < nu.vertices.size(); ++v) {
        CHECK(back.vertices[v][0] == nu.vertices[v][0]);
        CHECK(back.vertices[v][1] == nu.vertices[v][1]);
    }
    for (std::size_t a = 0; a < nu.densities.size(); ++a)
        CHECK(back.densities[a] == nu.densities[a]);
    CHECK(back.disjoint_mode == nu.disjoint_mode);
}

TEST_CASE("svg rendering") {
    TempDir tmp;
    SUBCASE("two-vertex polyline gives one path") {
        PolylineMeasure<2> nu{{{{0, 0}}, {{1, 0}}}, {1.0}, false};
        io::render_svg(nu, nullptr, tmp.file("a.svg"));
        const std::string svg = slurp(tmp.file("a.svg"));
        CHECK(std::count(svg.begin(), svg.end(), 'M') == 1);
    }
    SUBCASE("disjoint chains render as separate paths") {
        PolylineMeasure<2> nu;
        nu.vertices = {{{0, 0}}, {{1, 0}}, {{1, 1}}, {{0, 1}}, {{0, 2}}};
        nu.disjoint_mode = true;
        nu.densities = density_from_lengths(nu.vertices, true);
        io::render_svg(nu, nullptr, tmp.file("b.svg"));
        const std::string svg = slurp(tmp.file("b.svg"));
        int paths = 0;
        for (std::size_t pos = 0; (pos = svg.find("<path", pos)) != std::string::npos; ++pos)
            ++paths;
        CHECK(paths == 2);
    }
    SUBCASE("output bytes are deterministic") {
        auto nu = random_walk_polyline<2>(9, 3, 0.2);
        auto mu = random_cloud<2>(20, 4, true);
        io::render_svg(nu, &mu, tmp.file("c1.svg"));
        io::render_svg(nu, &mu, tmp.file("c2.svg"));
        CHECK(slurp(tmp.file("c1.svg")) == slurp(tmp.file("c2.svg")));
    }
}

TEST_CASE("potential json round trip") {
    TempDir tmp;
    DualPotential phi = random_potential(32, 9, 0.5);
    io::write_potential_json(phi, tmp.file("phi.json"));
    auto back = io::read_potential_json(tmp.file("phi.json"));
    REQUIRE(back.size() == phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) CHECK(back[i] == phi[i]);
}
