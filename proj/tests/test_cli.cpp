#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

using namespace nlmc::cli;

namespace {

struct Result {
    int status;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "nlmc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int status = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

std::string last_line(const std::string& text) {
    auto end = text.find_last_not_of('\n');
    auto start = text.rfind('\n', end);
    return text.substr(start + 1, end - start);
}

}  // namespace

TEST_CASE("corpus-list") {
    auto r = invoke({"corpus-list"});
    CHECK(r.status == 0);
    CHECK(r.out ==
          "name,states,parameters\nbistable,2,\nconsumer,3,b=1;e=1;eps=0.10000000000000001;lambda=1\n"
          "oscillator,3,\n");
}

TEST_CASE("simulate writes a trajectory") {
    auto r = invoke({"simulate", "--corpus", "bistable", "--m0", "0.9,0.1", "--horizon", "50"});
    REQUIRE(r.status == 0);
    CHECK(r.out.rfind("t,m_1,m_2\n", 0) == 0);
    auto line = last_line(r.out);
    CHECK(line.rfind("50,", 0) == 0);
    double m1 = std::stod(line.substr(3));
    CHECK(std::abs(m1 - 0.75) <= 1e-4);
}

TEST_CASE("sample is reproducible") {
    std::vector<std::string> args{"sample", "--corpus", "consumer", "--horizon", "5", "--seed", "7"};
    auto a = invoke(args), b = invoke(args);
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("t,state\n0,", 0) == 0);
    auto fixed = invoke({"sample", "--corpus", "consumer", "--horizon", "5", "--initial-state", "3"});
    CHECK(fixed.out.rfind("t,state\n0,3\n", 0) == 0);
}

TEST_CASE("invariant csv and structured text") {
    auto csv = invoke({"invariant", "--corpus", "bistable"});
    CHECK(csv.status == 0);
    CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 4);
    auto json = invoke({"invariant", "--corpus", "bistable", "--format", "structured-text"});
    CHECK(json.status == 0);
    CHECK(nlohmann::json::parse(json.out)["results"].size() == 3);
}

TEST_CASE("certificates map verdicts to exit codes") {
    auto ok = invoke({"certify-ergodic", "--corpus", "consumer", "--grid", "20"});
    CHECK(ok.status == 0);
    CHECK(nlohmann::json::parse(ok.out)["label"] == "CERTIFIED");
    auto refuted = invoke({"certify-ergodic", "--corpus", "bistable"});
    CHECK(refuted.status == 2);
    CHECK(nlohmann::json::parse(refuted.out)["label"] == "REFUTED-uniqueness");
    auto unique = invoke({"certify-unique", "--corpus", "consumer", "--grid", "10", "--h", "1e-5"});
    CHECK(unique.status == 0);
}

TEST_CASE("generator files on the command line") {
    auto path = std::filesystem::temp_directory_path() / "nlmc_cli_generator.json";
    {
        std::ofstream f(path);
        f << R"({"dimension": 2, "cells": [
            {"from": 1, "to": 2, "terms": [{"exponents": [0, 0], "coefficient": 3}]},
            {"from": 2, "to": 1, "terms": [{"exponents": [0, 0], "coefficient": 1}]}]})";
    }
    auto r = invoke({"certify-ergodic", "--generator", path.string()});
    CHECK(r.status == 0);
    CHECK(std::abs(nlohmann::json::parse(r.out)["evidence"]["m_bar"].get<double>() - 0.25) <= 1e-12);
    {
        std::ofstream f(path);
        f << "{\"dimension\": 2,\n \"cells\": [}";
    }
    auto bad = invoke({"invariant", "--generator", path.string()});
    CHECK(bad.status == 1);
    CHECK(bad.err.find("line 2") != std::string::npos);
    std::filesystem::remove(path);
}

TEST_CASE("usage errors") {
    CHECK(invoke({"simulate"}).status == 1);
    CHECK(invoke({"simulate", "--corpus", "bistable", "--generator", "x.json"}).status == 1);
    CHECK(invoke({"simulate", "--corpus", "bistable", "--horizon", "2e6"}).status == 1);
    CHECK(invoke({"simulate", "--corpus", "bistable", "--m0", "0.5,0.2"}).status == 1);
    CHECK(invoke({"simulate", "--corpus", "bistable", "--m0", "0.3,0.3,0.4"}).status == 1);
    CHECK(invoke({"invariant", "--corpus", "bistable", "--grid", "500"}).status == 1);
    CHECK(invoke({"certify-unique", "--corpus", "consumer", "--h", "0.5"}).status == 1);
    CHECK(invoke({"simulate", "--corpus", "bistable", "--b", "2"}).status == 1);
    CHECK(invoke({"reproduce", "--figure", "fig3"}).status == 1);
    CHECK(invoke({"frobnicate"}).status == 1);
    auto help = invoke({"--help"});
    CHECK(help.status == 0);
    CHECK(help.out.find("certify-ergodic") != std::string::npos);
}

TEST_CASE("parse_command_line fills the config") {
    const char* argv[] = {"nlmc", "simulate", "--corpus", "consumer", "--eps", "0.2", "--horizon", "3"};
    auto config = parse_command_line(8, argv);
    CHECK(config.command == Command::simulate);
    CHECK(*config.corpus == "consumer");
    CHECK(config.corpus_parameters.at("eps") == 0.2);
    CHECK(config.horizon == 3.0);
}

TEST_CASE("reproduce writes the figure data") {
    auto dir = std::filesystem::temp_directory_path() / "nlmc_cli_reproduce";
    std::filesystem::remove_all(dir);
    auto r = invoke({"reproduce", "--figure", "fig2", "--out-dir", dir.string()});
    REQUIRE(r.status == 0);
    CHECK(std::filesystem::exists(dir / "fig2_bistable_m0_0.05.csv"));
    std::ifstream summary(dir / "fig2_summary.csv");
    std::string header, row;
    std::getline(summary, header);
    CHECK(header == "m0_1,limit_m_1");
    std::getline(summary, row);
    CHECK(std::abs(std::stod(row.substr(row.find(',') + 1)) - 0.25) <= 1e-4);
    auto fig1 = invoke({"reproduce", "--figure", "fig1", "--out-dir", dir.string()});
    CHECK(fig1.status == 0);
    CHECK(std::filesystem::exists(dir / "fig1_oscillator.csv"));
    std::filesystem::remove_all(dir);
}
