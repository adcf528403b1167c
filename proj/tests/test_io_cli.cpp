#include "doctest.h"

#include "triconv/io.hpp"
#include "triconv/qubitconv.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace triconv;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(TRICONV_CLI_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), n);
    int status = pclose(pipe);
    res.exit_code = WEXITSTATUS(status);
    return res;
}

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / "triconv_cli_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
    auto path = scratch_dir() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

std::string write_json(const std::string& name, const json& j) {
    return write_file(name, j.dump());
}

}  // namespace

TEST_CASE("tensor and vector JSON round-trips are bitwise exact") {
    Rng rng = make_rng(5);
    StochTensor t = random_tristochastic(4, 3, rng);
    StochTensor back = tensor_from_json(json::parse(to_json(t).dump()));
    REQUIRE(back.data().size() == t.data().size());
    for (size_t i = 0; i < t.data().size(); ++i) CHECK(back.data()[i] == t.data()[i]);

    ProbVector p = ProbVector(random_probability(6, rng));
    ProbVector pback = prob_vector_from_json(json::parse(to_json(p).dump()));
    for (int i = 0; i < p.dim(); ++i) CHECK(pback[i] == p[i]);
}

TEST_CASE("density and dynamical matrix JSON round-trips are bitwise exact") {
    Rng rng = make_rng(7);
    DensityMatrix rho{random_density(3, rng)};
    DensityMatrix rback = density_from_json(json::parse(to_json(rho).dump()));
    CHECK(max_abs_diff(rback.matrix, rho.matrix) == 0.0);

    DynamicalMatrix d = kraus_to_choi(qubit_kraus(ConvParams(0.3, 0.7, 1.1)));
    DynamicalMatrix dback = dynamical_from_json(json::parse(to_json(d).dump()));
    CHECK(dback.parts == 3);
    CHECK(dback.local_dim == 2);
    CHECK(max_abs_diff(dback.matrix, d.matrix) == 0.0);

    KrausSet k = qubit_kraus(ConvParams(0.1, 0.2, 0.3));
    KrausSet kback = kraus_from_json(json::parse(to_json(k).dump()));
    CHECK(max_abs_diff(kback.ops[0], k.ops[0]) == 0.0);
    CHECK(max_abs_diff(kback.ops[1], k.ops[1]) == 0.0);

    BlockBasisFamily b = default_blocks(3, BlockScheme::mub);
    BlockBasisFamily bback = blocks_from_json(json::parse(to_json(b).dump()));
    CHECK(bback.scheme == BlockScheme::mub);
    for (int j = 0; j < 3; ++j)
        CHECK(max_abs_diff(bback.blocks[static_cast<size_t>(j)],
                           b.blocks[static_cast<size_t>(j)]) == 0.0);
}

TEST_CASE("io errors are distinct from validation errors") {
    CHECK_THROWS_AS(load_json_file("/nonexistent/file.json"), IoError);
    auto bad = write_file("bad.json", "{not json");
    CHECK_THROWS_AS(load_json_file(bad), IoError);
    // well-formed JSON carrying an invalid tensor -> ValidationError
    json negative{{"order", 3}, {"dim", 2}, {"entries", {-1, 2, 0, 0, 0, 0, 0, 0}}};
    CHECK_THROWS_AS(tensor_from_json(negative), ValidationError);
    json wrong_count{{"order", 3}, {"dim", 2}, {"entries", {1, 0}}};
    CHECK_THROWS_AS(tensor_from_json(wrong_count), DimensionError);
}

TEST_CASE("cli: tensor check reports the classification") {
    auto t3 = write_json("T3.json", to_json(make_t3()));
    RunResult res = run_cli("tensor check " + t3 + " --format table");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("tristochastic, permutation") != std::string::npos);
}

TEST_CASE("cli: tensor eigenvectors of T2") {
    auto t2 = write_json("T2.json", to_json(make_t2()));
    RunResult res = run_cli("tensor eigenvectors " + t2);
    CHECK(res.exit_code == 0);
    json j = json::parse(res.out);
    REQUIRE(j.at("eigenvectors").size() == 2);
    for (const auto& e : j.at("eigenvectors")) CHECK(e.at("eigenvalue").get<double>() == 1.0);
    CHECK(j.at("eigenvectors").at(1).at("zero_set").at(0).get<int>() == 2);  // 1-based
}

TEST_CASE("cli: identity and inverse of small tensors") {
    auto cyc = write_json("cyclic4.json", to_json(make_cyclic_convolution_tensor(4)));
    RunResult res = run_cli("tensor identity " + cyc);
    CHECK(res.exit_code == 0);
    CHECK(json::parse(res.out).at("basis_index").get<int>() == 1);

    auto t2 = write_json("T2.json", to_json(make_t2()));
    RunResult inv = run_cli("tensor inverse " + t2 + " --basis 2");
    CHECK(inv.exit_code == 0);
    CHECK(json::parse(inv.out).at("basis_index").get<int>() == 2);

    auto uni = write_json("uniform.json",
                          to_json(StochTensor(3, 3, std::vector<double>(27, 1.0 / 3.0))));
    RunResult no_id = run_cli("tensor inverse " + uni + " --basis 1");
    CHECK(no_id.exit_code == 2);  // no identity -> domain error
}

TEST_CASE("cli: exit code contract") {
    RunResult missing = run_cli("tensor check /nonexistent.json");
    CHECK(missing.exit_code == 3);

    auto bad = write_file("malformed.json", "{{{");
    RunResult malformed = run_cli("tensor check " + bad);
    CHECK(malformed.exit_code == 3);

    // dimension mismatch in convolve -> 2
    auto t2 = write_json("T2b.json", to_json(make_t2()));
    auto p3 = write_json("p3.json", to_json(ProbVector::uniform(3)));
    auto p2 = write_json("p2.json", to_json(ProbVector::uniform(2)));
    RunResult mismatch = run_cli("convolve classical " + t2 + " " + p3 + " " + p2);
    CHECK(mismatch.exit_code == 2);
}

TEST_CASE("cli: classical and quantum convolution agree on diagonals") {
    auto t2 = write_json("T2c.json", to_json(make_t2()));
    auto e1 = write_json("e1.json", to_json(ProbVector::basis(2, 0)));
    RunResult cl = run_cli("convolve classical " + t2 + " " + e1 + " " + e1);
    CHECK(cl.exit_code == 0);
    json out = json::parse(cl.out);
    CHECK(out.at("entries").at(0).get<double>() == 1.0);

    auto choi = write_json("choi.json", to_json(coherify_diagonal(make_t2())));
    auto rho = write_json("rho.json", to_json(DensityMatrix::basis_state(2, 0)));
    RunResult q = run_cli("convolve quantum " + choi + " " + rho + " " + rho + " --check-diagonal");
    CHECK(q.exit_code == 0);
    json qout = json::parse(q.out);
    CHECK(qout.at("re").at(0).at(0).get<double>() == doctest::Approx(1.0));
    CHECK(qout.at("diagonal_consistency_deviation").get<double>() <= 1e-12);

    // maximally mixed absorbs under the m-stochastic diagonal coherification
    auto star = write_json("star.json", to_json(DensityMatrix::maximally_mixed(2)));
    RunResult qs = run_cli("convolve quantum " + choi + " " + rho + " " + star);
    json sout = json::parse(qs.out);
    CHECK(sout.at("re").at(0).at(0).get<double>() == doctest::Approx(0.5));
    CHECK(std::abs(sout.at("re").at(0).at(1).get<double>()) <= 1e-12);
}

TEST_CASE("cli: coherify reports the coherence figures") {
    auto t2 = write_json("T2d.json", to_json(make_t2()));
    RunResult mub = run_cli("coherify " + t2 + " --scheme mub");
    CHECK(mub.exit_code == 0);
    json rep = json::parse(mub.out);
    CHECK(rep.at("c2").get<double>() == doctest::Approx(0.25).epsilon(1e-12));

    auto t3 = write_json("T3d.json", to_json(make_t3()));
    RunResult fr = run_cli("coherify " + t3 + " --scheme fourier");
    json rep3 = json::parse(fr.out);
    CHECK(rep3.at("c2").get<double>() == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
    CHECK(rep3.at("entropic").get<double>() == doctest::Approx(std::log(3.0)).epsilon(1e-12));

    RunResult diag = run_cli("coherify " + t2 + " --scheme diagonal");
    CHECK(json::parse(diag.out).at("c2").get<double>() == 0.0);

    // no scheme: mub for prime N, fourier otherwise
    RunResult def2 = run_cli("coherify " + t2);
    CHECK(def2.exit_code == 0);
    CHECK(json::parse(def2.out).at("c2").get<double>() == doctest::Approx(0.25));
    Rng rng4 = make_rng(33);
    auto p4 = write_json("perm4.json", to_json(random_permutation_tensor(4, rng4)));
    RunResult def4 = run_cli("coherify " + p4);
    CHECK(def4.exit_code == 0);
    CHECK(json::parse(def4.out).at("c2").get<double>() == doctest::Approx(3.0 / 16.0));

    // non-permutation tensor with a coherent scheme -> exit 2
    Rng rng = make_rng(11);
    auto mixed = write_json("mixed.json", to_json(random_tristochastic(2, 3, rng)));
    CHECK(run_cli("coherify " + mixed + " --scheme mub").exit_code == 2);
    CHECK(run_cli("coherify " + mixed + " --scheme diagonal").exit_code == 0);

    // emitted choi and kraus files parse back and agree
    auto choi_path = (scratch_dir() / "out_choi.json").string();
    auto kraus_path = (scratch_dir() / "out_kraus.json").string();
    RunResult files = run_cli("coherify " + t2 + " --scheme mub --out-choi " + choi_path +
                              " --out-kraus " + kraus_path);
    CHECK(files.exit_code == 0);
    DynamicalMatrix d = dynamical_from_json(load_json_file(choi_path));
    KrausSet k = kraus_from_json(load_json_file(kraus_path));
    CHECK(max_abs_diff(kraus_to_choi(k).matrix, d.matrix) <= 1e-12);
}

TEST_CASE("cli: qubit metrics and mitigation") {
    RunResult met = run_cli("qubit metrics --theta 1.5707963267948966");
    CHECK(met.exit_code == 0);
    json m = json::parse(met.out);
    CHECK(m.at("e_p").get<double>() == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(m.at("g_t").get<double>() == doctest::Approx(0.5).epsilon(1e-10));

    RunResult mit =
        run_cli("qubit mitigate --theta -1.5707963267948966 --state 1 --trials 100");
    CHECK(mit.exit_code == 0);
    json mj = json::parse(mit.out);
    CHECK(mj.at("min_fidelity").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(mj.at("seed").get<std::uint64_t>() == kDefaultSeed);
}

TEST_CASE("cli: circuit emission round-trips through the text format") {
    const std::string args = "--alpha 0 --theta 0.7 --phi 0.3";
    RunResult text = run_cli("qubit circuit " + args + " --circuit-format text");
    CHECK(text.exit_code == 0);

    // parse "GATE wire[,wire] [param]" lines back into a circuit
    GateCircuit parsed;
    std::istringstream lines(text.out);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string name, wires;
        ls >> name >> wires;
        double param = 0.0;
        ls >> param;
        int w0 = wires[0] - '0';
        int w1 = wires.size() > 2 ? wires[2] - '0' : -1;
        if (name == "H") parsed.gates.push_back(Gate::h(w0));
        else if (name == "CNOT") parsed.gates.push_back(Gate::cnot(w0, w1));
        else if (name == "Z") parsed.gates.push_back(Gate::z(w0, param));
        else if (name == "X") parsed.gates.push_back(Gate::x(w0, param));
        else if (name == "CZ") parsed.gates.push_back(Gate::cz(w0, w1, param));
        else if (name == "CX") parsed.gates.push_back(Gate::cx(w0, w1, param));
        else FAIL("unknown gate line: " << line);
    }
    CHECK(distance_up_to_phase(u4(ConvParams(0.0, 0.7, 0.3)), circuit_to_unitary(parsed)) <=
          1e-10);

    RunResult qasm = run_cli("qubit circuit " + args + " --format qasm");
    CHECK(qasm.exit_code == 0);

    // restricted OPENQASM reader for the emitted gate set
    GateCircuit qparsed;
    std::istringstream qlines(qasm.out);
    while (std::getline(qlines, line)) {
        if (line.empty() || line.rfind("OPENQASM", 0) == 0 || line.rfind("include", 0) == 0 ||
            line.rfind("qubit", 0) == 0)
            continue;
        auto q0 = line.find("q[");
        REQUIRE(q0 != std::string::npos);
        int w0 = line[q0 + 2] - '0';
        auto q1 = line.find("q[", q0 + 1);
        int w1 = q1 == std::string::npos ? -1 : line[q1 + 2] - '0';
        if (line.rfind("h ", 0) == 0) qparsed.gates.push_back(Gate::h(w0));
        else if (line.rfind("cx ", 0) == 0) qparsed.gates.push_back(Gate::cnot(w0, w1));
        else if (line.rfind("p(", 0) == 0)
            qparsed.gates.push_back(Gate::z(w0, std::stod(line.substr(2))));
        else if (line.rfind("cp(", 0) == 0)
            qparsed.gates.push_back(Gate::cz(w0, w1, std::stod(line.substr(3))));
        else FAIL("unknown qasm line: " << line);
    }
    CHECK(distance_up_to_phase(u4(ConvParams(0.0, 0.7, 0.3)), circuit_to_unitary(qparsed)) <=
          1e-10);
}

TEST_CASE("cli: plane sweep CSV") {
    RunResult res = run_cli("qubit plane --points 5");
    CHECK(res.exit_code == 0);
    std::istringstream lines(res.out);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "theta,e_p,g_t");
    int rows = 0;
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        ++rows;
        double theta, ep, gt;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &theta, &ep, &gt) == 3);
        CHECK(std::abs(ep - 2.0 / 3.0) <= 1e-10);
        CHECK(std::abs(gt - (3.0 - std::cos(theta)) / 6.0) <= 1e-10);
    }
    CHECK(rows == 5);
}

TEST_CASE("cli: exploratory entropy sweep emits a seeded CSV") {
    RunResult res = run_cli("qubit entropy --points 3 --steps 2 --trials 20 --seed 5");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("# scheme: self-convolution") != std::string::npos);
    CHECK(res.out.find("theta,mean_entropy") != std::string::npos);
    std::istringstream lines(res.out);
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
        double theta, s;
        if (std::sscanf(line.c_str(), "%lf,%lf", &theta, &s) == 2) {
            ++rows;
            CHECK(s >= 0.0);
            CHECK(s <= std::log(2.0) + 1e-12);
        }
    }
    CHECK(rows == 3);
    CHECK(run_cli("qubit entropy --points 3 --steps 2 --trials 20 --seed 5").out == res.out);
}

TEST_CASE("cli: output redirects to a file with -o") {
    auto csv_path = (scratch_dir() / "plane.csv").string();
    RunResult res = run_cli("qubit plane --points 3 -o " + csv_path);
    CHECK(res.exit_code == 0);
    CHECK(res.out.empty());
    std::ifstream in(csv_path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "theta,e_p,g_t");

    auto t2 = write_json("T2f.json", to_json(make_t2()));
    auto e1 = write_json("e1b.json", to_json(ProbVector::basis(2, 0)));
    auto out_path = (scratch_dir() / "result.json").string();
    RunResult conv = run_cli("convolve classical " + t2 + " " + e1 + " " + e1 + " -o " + out_path);
    CHECK(conv.exit_code == 0);
    CHECK(prob_vector_from_json(load_json_file(out_path)).delta_index() == 0);
}

TEST_CASE("cli: runs are deterministic given the seed") {
    const std::string cmd = "qubit metrics --theta 0.9 --mc-samples 2000 --seed 77";
    RunResult a = run_cli(cmd);
    RunResult b = run_cli(cmd);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(json::parse(a.out).at("seed").get<int>() == 77);

    RunResult other = run_cli("qubit metrics --theta 0.9 --mc-samples 2000 --seed 78");
    CHECK(other.out != a.out);
}

TEST_CASE("cli: tolerance override via flag and environment") {
    // perturb one entry of T2 by 1e-6: fails the default structural
    // tolerance, passes a loosened one
    StochTensor t2 = make_t2();
    std::vector<double> entries = t2.data();
    entries[0] += 1e-6;
    json j{{"order", 3}, {"dim", 2}, {"entries", entries}};
    auto path = write_json("T2_perturbed.json", j);

    RunResult strict = run_cli("tensor check " + path + " --format table");
    CHECK(strict.exit_code == 0);
    CHECK(strict.out.find("permutation") == std::string::npos);

    RunResult loose = run_cli("tensor check " + path + " --tol 1e-3 --format table");
    CHECK(loose.out.find("tristochastic, permutation") != std::string::npos);

    const std::string env_cmd = std::string("TRICONV_TOL=1e-3 ") + TRICONV_CLI_PATH +
                                " tensor check " + path + " --format table 2>/dev/null";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(env_cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    pclose(pipe);
    CHECK(out.find("tristochastic, permutation") != std::string::npos);
}

TEST_CASE("cli: coherify with a custom block family file") {
    Rng rng = make_rng(31);
    std::vector<CMat> blocks{CMat(CMat::Identity(2, 2)), haar_unitary(2, rng)};
    auto blocks_path =
        write_json("blocks.json", to_json(BlockBasisFamily(blocks, BlockScheme::custom)));
    auto t2 = write_json("T2e.json", to_json(make_t2()));
    RunResult res = run_cli("coherify " + t2 + " --scheme custom --blocks " + blocks_path);
    CHECK(res.exit_code == 0);
    CHECK(json::parse(res.out).at("c2").get<double>() == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("cli: version flag") {
    RunResult res = run_cli("--version");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("triconv") != std::string::npos);
}

TEST_CASE("cli: gate convention report") {
    RunResult res = run_cli("qubit gates");
    CHECK(res.exit_code == 0);
    json j = json::parse(res.out);
    int matches = 0;
    for (const auto& f : j.at("findings"))
        if (f.at("matches").get<bool>()) ++matches;
    CHECK(matches == 2);
}
