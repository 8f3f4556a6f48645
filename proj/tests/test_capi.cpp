#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>

#include "relubias.h"

namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("relubias_capi_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

std::string take(char* s) {
    std::string out = s ? s : "";
    rb_string_free(s);
    return out;
}

constexpr const char* kParams =
    R"({"n":6,"d":64,"seed":11,"y_min":0.1,"y_max":1.0,"frac_positive":0.5})";

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("version and error state") {
    CHECK(std::strcmp(rb_version(), "0.1.0") == 0);
    CHECK(std::string(rb_last_error()).empty());
}

TEST_CASE("dataset lifecycle over the C surface") {
    rb_dataset* ds = nullptr;
    REQUIRE(rb_dataset_generate(kParams, &ds) == RB_OK);
    char* info = nullptr;
    REQUIRE(rb_dataset_info(ds, &info) == RB_OK);
    const std::string info_s = take(info);
    CHECK(info_s.find("\"n\": 6") != std::string::npos);
    CHECK(info_s.find("cg_hat") != std::string::npos);

    const std::string dir = temp_dir("ds");
    REQUIRE(rb_dataset_save_json(ds, (dir + "/ds.json").c_str()) == RB_OK);
    REQUIRE(rb_dataset_save_csv(ds, (dir + "/ds.csv").c_str()) == RB_OK);
    rb_dataset* back = nullptr;
    REQUIRE(rb_dataset_load_json((dir + "/ds.json").c_str(), &back) == RB_OK);
    rb_dataset_free(back);
    rb_dataset_free(ds);

    // malformed params produce an input error plus a message
    rb_dataset* bad = nullptr;
    CHECK(rb_dataset_generate("{\"n\": 4}", &bad) == RB_ERROR_INPUT);
    CHECK_FALSE(std::string(rb_last_error()).empty());
    CHECK(rb_dataset_generate(nullptr, &bad) == RB_ERROR_INPUT);
    CHECK(rb_dataset_load_json("/definitely/not/here.json", &bad) == RB_ERROR_INPUT);
}

TEST_CASE("gradient descent run and trajectory artifacts") {
    rb_dataset* ds = nullptr;
    REQUIRE(rb_dataset_generate(kParams, &ds) == RB_OK);
    rb_trajectory* traj = nullptr;
    REQUIRE(rb_gd_run(ds, R"({"init":{"kind":"single_eps"},"max_iters":200})", &traj) == RB_OK);
    char* summary = nullptr;
    REQUIRE(rb_trajectory_summary_json(traj, &summary) == RB_OK);
    const std::string s = take(summary);
    CHECK(s.find("\"eta\"") != std::string::npos);
    CHECK(s.find("\"t0\"") != std::string::npos);
    CHECK(s.find("\"stop_reason\"") != std::string::npos);
    const std::string dir = temp_dir("traj");
    REQUIRE(rb_trajectory_write_csv(traj, (dir + "/t.csv").c_str()) == RB_OK);
    rb_trajectory_free(traj);

    rb_trajectory* bad = nullptr;
    CHECK(rb_gd_run(ds, R"({"init":{"kind":"nope"}})", &bad) == RB_ERROR_INPUT);
    rb_dataset_free(ds);
}

TEST_CASE("min-norm handles") {
    rb_dataset* ds = nullptr;
    REQUIRE(rb_dataset_generate(kParams, &ds) == RB_OK);

    rb_minnorm* en = nullptr;
    REQUIRE(rb_minnorm_single(ds, 1e-9, &en) == RB_OK);
    rb_minnorm* pg = nullptr;
    REQUIRE(rb_minnorm_single_pg(ds, 1e-9, &pg) == RB_OK);
    char* ja = nullptr;
    char* jb = nullptr;
    REQUIRE(rb_minnorm_to_json(en, &ja) == RB_OK);
    REQUIRE(rb_minnorm_to_json(pg, &jb) == RB_OK);
    const std::string a = take(ja), b = take(jb);
    CHECK(a.find("enumeration") != std::string::npos);
    CHECK(b.find("projected_gradient") != std::string::npos);
    rb_minnorm_free(en);
    rb_minnorm_free(pg);

    rb_minnorm* two = nullptr;
    REQUIRE(rb_minnorm_two(ds, 1e-9, &two) == RB_OK);
    rb_minnorm_free(two);

    double bound = 0;
    const int signs[2] = {+1, -1};
    REQUIRE(rb_minnorm_upper_bound_multi(ds, 2, signs, &bound) == RB_OK);
    CHECK(bound > 0);
    rb_dataset_free(ds);
}

TEST_CASE("experiment, plot, and verify through the C surface") {
    const std::string dir = temp_dir("exp");
    const std::string cfg = std::string(R"({"scenario":"single_thm","seeds":[0],"d":800,)") +
                            R"("max_iters":300,"threads":1,"out_dir":")" + dir + R"("})";
    char* manifest = nullptr;
    REQUIRE(rb_experiment_run(cfg.c_str(), &manifest) == RB_OK);
    const std::string m = take(manifest);
    CHECK(m.find("\"results\"") != std::string::npos);

    char* report = nullptr;
    rb_status st = rb_verify_files((dir + "/seed0_trajectory.csv").c_str(),
                                   (dir + "/seed0_dataset.json").c_str(),
                                   R"({"scenario":"single_thm","d":800})", &report);
    CHECK(st == RB_OK);
    CHECK(take(report).find("\"pass\": true") != std::string::npos);

    CHECK(rb_verify_files("/no/such.csv", (dir + "/seed0_dataset.json").c_str(),
                          R"({"scenario":"single_thm"})", nullptr) == RB_ERROR_INPUT);

    CHECK(rb_emit_plot("/no/such.csv", (dir + "/x.svg").c_str(), "default") == RB_ERROR_INPUT);
}

}  // TEST_SUITE
