// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Runs without any sidecar adapter.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "hrsal/attention_sampler.hpp"
#include "hrsal/fusion.hpp"
#include "hrsal/metrics.hpp"
#include "hrsal/pipeline.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace hrsal;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Collects the first few problems of one criterion.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (ok) return;
        ++failures_;
        if (notes_.size() < 5) notes_.push_back(what);
    }
    bool ok() const { return failures_ == 0; }
    std::string detail() const {
        std::string out = fmt::format("{} problem(s)", failures_);
        for (const auto& n : notes_) out += "; " + n;
        return out;
    }

private:
    int failures_ = 0;
    std::vector<std::string> notes_;
};

bool rel_close(double a, double b, double tol) {
    if (a == b) return true;
    return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

BinaryMask nonempty_blob(synth::Rng& rng, int w, int h) {
    for (;;) {
        auto m = synth::blob_mask(rng, w, h);
        if (m.count() > 0 && m.count() < static_cast<std::size_t>(w) * h) return m;
    }
}

std::vector<std::uint8_t> painted(const std::vector<PatchSample>& samples, int w, int h) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h, 0);
    for (const auto& s : samples)
        for (int y = s.region.y; y < s.region.y + s.region.h; ++y)
            for (int x = s.region.x; x < s.region.x + s.region.w; ++x) out[static_cast<std::size_t>(y) * w + x] = 1;
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

AttentionMap to_attention(const BinaryMask& m) {
    return AttentionMap(m.width(), m.height(), std::vector<std::uint8_t>(m.values().begin(), m.values().end()));
}

// ---------------------------------------------------------------------------

Check metric_oracles(std::string& note) {
    Check c;
    synth::Rng rng(1001);
    const auto t0 = Clock::now();
    for (int i = 0; i < 120; ++i) {
        auto gt = i % 2 ? synth::random_mask(rng, 64, 64, 0.05 + 0.9 * (i % 7) / 7.0) : synth::blob_mask(rng, 64, 64);
        auto pred = synth::random_map(rng, 64, 64);
        const auto pp = oracle::plane_of(pred);
        const auto gp = oracle::plane_of(gt);

        c.expect(rel_close(mae(pred, gt), oracle::mae(pp, gp), 1e-9), fmt::format("mae pair {}", i));
        const auto f = f_beta_adaptive(pred, gt);
        const auto fo = oracle::f_beta_adaptive(pp, gp, 0.3);
        c.expect(rel_close(f.f_beta, fo.f, 1e-9) && rel_close(f.precision, fo.precision, 1e-9) &&
                     rel_close(f.recall, fo.recall, 1e-9),
                 fmt::format("f_beta pair {}", i));
        const auto pr = pr_curve(pred, gt);
        const auto po = oracle::pr_curve(pp, gp, 256);
        bool same = pr.size() == po.size();
        for (std::size_t k = 0; same && k < pr.size(); ++k) {
            same = pr[k].threshold == po[k].threshold && rel_close(pr[k].precision, po[k].precision, 1e-9) &&
                   rel_close(pr[k].recall, po[k].recall, 1e-9);
        }
        c.expect(same, fmt::format("pr_curve pair {}", i));
    }
    const double secs = seconds_since(t0);
    c.expect(secs < 10.0, fmt::format("took {:.2f} s", secs));
    note = fmt::format("120 pairs, {:.2f} s", secs);
    return c;
}

Check bde_oracle(std::string& note) {
    Check c;
    synth::Rng rng(1002);
    std::uniform_int_distribution<int> side(4, 128);
    for (int i = 0; i < 60; ++i) {
        const int w = i == 0 ? 128 : side(rng), h = i == 0 ? 128 : side(rng);
        auto a = nonempty_blob(rng, w, h);
        auto b = nonempty_blob(rng, w, h);
        const double o = oracle::bde(oracle::plane_of(a), oracle::plane_of(b));
        const double ab = bde(a, b);
        const double ba = bde(b, a);
        c.expect(std::fabs(ab - o) <= 1e-6, fmt::format("{}x{}: {} vs oracle {}", w, h, ab, o));
        c.expect(ab == ba, fmt::format("{}x{}: asymmetric {} vs {}", w, h, ab, ba));
    }
    BinaryMask x(10, 10), y(10, 10);
    x.set(0, 0, true);
    y.set(3, 4, true);
    const double d = bde(x, y);
    c.expect(d == 5.0, fmt::format("3-4-5 case gave {}", d));
    note = "60 mask pairs";
    return c;
}

Check aps_coverage(std::string& note) {
    Check c;
    synth::Rng rng(1003);
    std::uniform_int_distribution<int> wd(1, 2048), hd(1, 1536);
    APSConfig cfg;
    std::size_t patches = 0;
    for (int i = 0; i < 60; ++i) {
        const int w = i == 0 ? 2048 : wd(rng), h = i == 0 ? 1536 : hd(rng);
        BinaryMask m(w, h);
        switch (i % 4) {
            case 0: m = synth::blob_mask(rng, w, h); break;
            case 1: m = synth::random_mask(rng, w, h, 0.0005); break;
            case 2: m = synth::random_mask(rng, w, h, 0.3); break;
            default: {
                std::uniform_int_distribution<int> px(0, w - 1), py(0, h - 1);
                m.set(px(rng), py(rng), true);
                break;
            }
        }
        cfg.seed = static_cast<std::uint64_t>(i);
        const auto samples = sample_patches(to_attention(m), w, h, cfg);
        patches += samples.size();
        const auto cover = painted(samples, w, h);
        std::size_t missed = 0;
        for (std::size_t k = 0; k < cover.size(); ++k)
            if (m.values()[k] && !cover[k]) ++missed;
        c.expect(missed == 0, fmt::format("{}x{} map {}: {} attended pixel(s) uncovered", w, h, i, missed));
        for (const auto& s : samples) {
            c.expect(s.region.x >= 0 && s.region.y >= 0 && s.region.x + s.region.w <= w &&
                         s.region.y + s.region.h <= h,
                     fmt::format("{}x{} map {}: region outside image", w, h, i));
        }
    }
    for (auto [w, h] : {std::pair{2048, 1536}, std::pair{1, 1}, std::pair{500, 20}}) {
        c.expect(sample_patches(AttentionMap(w, h), w, h, cfg).empty(), fmt::format("{}x{} all-zero emitted", w, h));
    }
    note = fmt::format("60 maps, {} regions", patches);
    return c;
}

Check aps_determinism(std::string& note) {
    Check c;
    synth::Rng rng(1004);
    APSConfig cfg;
    cfg.seed = 20240;
    std::vector<AttentionMap> maps;
    std::vector<std::pair<int, int>> dims;
    std::uniform_int_distribution<int> wd(448, 2048), hd(448, 1536);
    for (int i = 0; i < 16; ++i) {
        const int w = wd(rng), h = hd(rng);
        maps.push_back(to_attention(i % 2 ? synth::blob_mask(rng, w, h) : synth::random_mask(rng, w, h, 0.01)));
        dims.emplace_back(w, h);
    }
    auto run_all = [&](int threads) {
        std::vector<std::vector<PatchSample>> out(maps.size());
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = static_cast<std::size_t>(t); i < maps.size(); i += static_cast<std::size_t>(threads))
                    out[i] = sample_patches(maps[i], dims[i].first, dims[i].second, cfg);
            });
        }
        pool.clear();
        return out;
    };
    const auto first = run_all(1);
    c.expect(first == run_all(1), "two serial runs differ");
    c.expect(first == run_all(4), "serial and 4-thread runs differ");
    c.expect(first == run_all(16), "serial and 16-thread runs differ");

    std::uniform_int_distribution<int> widths(1, 100000);
    for (int i = 0; i < 1000; ++i) {
        const int w = widths(rng);
        const int expected = static_cast<int>(std::ceil(static_cast<double>(w) / 384.0)) + 5;
        c.expect(column_count(w, cfg) == expected, fmt::format("N_x({}) = {}", w, column_count(w, cfg)));
    }

    std::size_t checked = 0;
    for (std::size_t i = 0; i < maps.size(); ++i) {
        for (const auto& s : first[i]) {
            if (s.origin != PatchOrigin::ColumnScan) continue;
            ++checked;
            c.expect(s.side >= 320 && s.side <= 448 && s.region.w == s.side && s.region.h == s.side,
                     fmt::format("column-scan side {} region {}x{}", s.side, s.region.w, s.region.h));
        }
    }
    c.expect(checked > 0, "no column-scan patches to check");
    note = fmt::format("{} maps, 1000 widths, {} column-scan sides", maps.size(), checked);
    return c;
}

Check fusion_identity(std::string& note) {
    Check c;
    synth::Rng rng(1005);
    RunConfig cfg;
    cfg.predictors.coarse = CoarseKind::BaselineContrast;
    cfg.predictors.refiner = RefinerKind::Identity;
    cfg.fusion.consistency = ConsistencyMode::None;
    std::uniform_int_distribution<int> wd(64, 1920), hd(64, 1080);
    std::size_t patches = 0;
    for (int i = 0; i < 12; ++i) {
        const int w = i == 0 ? 1920 : wd(rng), h = i == 0 ? 1080 : hd(rng);
        const RasterImage img = i % 3 == 2 ? synth::random_image(rng, w, h) : synth::scene(rng, w, h).first;
        cfg.aps.seed = static_cast<std::uint64_t>(i);
        const auto r = run_pipeline(img, cfg);
        patches += r.samples.size();
        const auto cover = painted(r.samples, w, h);
        double worst = 0.0;
        std::size_t changed_outside = 0;
        for (std::size_t k = 0; k < cover.size(); ++k) {
            worst = std::max(worst, std::fabs(r.final_map.values()[k] - r.coarse.values()[k]));
            if (!cover[k] && r.final_map.values()[k] != r.coarse.values()[k]) ++changed_outside;
        }
        c.expect(worst <= 1e-6, fmt::format("{}x{}: max |final - coarse| = {:.3g}", w, h, worst));
        c.expect(changed_outside == 0, fmt::format("{}x{}: {} pixel(s) outside patches changed", w, h, changed_outside));
    }
    SaliencyMap coarse(4, 1, 0.9);
    const auto two = fuse(coarse, AttentionMap(4, 1, true),
                          {{Region{0, 0, 3, 1}, SaliencyMap(3, 1, 0.2)}, {Region{1, 0, 3, 1}, SaliencyMap(3, 1, 0.6)}},
                          FusionPolicy{});
    c.expect(two.at(1, 0) == 0.4 && two.at(2, 0) == 0.4, fmt::format("overlap gave {}", two.at(1, 0)));
    c.expect(patches > 0, "no patches were sampled");
    note = fmt::format("12 images, {} patches", patches);
    return c;
}

Check fusion_permutation(std::string& note) {
    Check c;
    synth::Rng rng(1006);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const int w = 300, h = 200;
        auto coarse = synth::random_map(rng, w, h);
        auto mask = synth::random_mask(rng, w, h, 0.5);
        AttentionMap attention = to_attention(mask);
        std::vector<RefinedPatch> patches;
        std::uniform_int_distribution<int> px(0, w - 1), py(0, h - 1);
        for (int k = 0; k < 40; ++k) {
            const int x = px(rng), y = py(rng);
            std::uniform_int_distribution<int> ew(1, w - x), eh(1, h - y);
            Region r{x, y, ew(rng), eh(rng)};
            patches.push_back({r, synth::random_map(rng, r.w, r.h)});
        }
        for (auto mode : {FusionMode::ReplaceUncertain, FusionMode::PasteAll}) {
            FusionPolicy policy;
            policy.mode = mode;
            const auto base = fuse(coarse, attention, patches, policy);
            for (int s = 0; s < 10; ++s) {
                std::shuffle(patches.begin(), patches.end(), rng);
                const auto out = fuse(coarse, attention, patches, policy);
                for (std::size_t k = 0; k < out.values().size(); ++k)
                    worst = std::max(worst, std::fabs(out.values()[k] - base.values()[k]));
            }
        }
    }
    c.expect(worst <= 1e-12, fmt::format("max change {:.3g}", worst));
    note = fmt::format("200 shuffles, max change {:.3g}", worst);
    return c;
}

Check s_measure_dual(std::string& note) {
    Check c;
    synth::Rng rng(1007);
    std::uniform_int_distribution<int> side(2, 96);
    double worst = 0.0;
    for (int i = 0; i < 150; ++i) {
        const int w = side(rng), h = side(rng);
        BinaryMask gt(w, h);
        switch (i % 5) {
            case 0: gt = synth::random_mask(rng, w, h, 0.4); break;
            case 1: gt = BinaryMask(w, h); break;
            case 2: gt = BinaryMask(w, h, true); break;
            default: gt = synth::blob_mask(rng, w, h); break;
        }
        const auto pred = synth::random_map(rng, w, h);
        const double got = s_measure(pred, gt);
        const double want = oracle::s_measure(oracle::plane_of(pred), oracle::plane_of(gt), 0.5);
        worst = std::max(worst, std::fabs(got - want));
        c.expect(std::fabs(got - want) <= 1e-6, fmt::format("{}x{} pair {}: {} vs {}", w, h, i, got, want));
    }
    for (int i = 0; i < 20; ++i) {
        auto gt = nonempty_blob(rng, 64, 48);
        std::vector<double> v;
        for (auto b : gt.values()) v.push_back(b ? 1.0 : 0.0);
        const double s = s_measure(SaliencyMap(64, 48, v), gt);
        c.expect(std::fabs(s - 1.0) <= 1e-6, fmt::format("identical binary gave {}", s));
    }
    note = fmt::format("150 pairs, max diff {:.3g}", worst);
    return c;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HRSAL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Check end_to_end(std::string& note) {
    Check c;
    const fs::path root = synth::temp_dir("acceptance-e2e");
    synth::write_dataset(root / "data", 10, 1920, 1080, 1008);
    const unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    const std::string base = fmt::format("eval '{}' --seed 7 --jobs {} --out ", (root / "data").string(), jobs);

    const auto t0 = Clock::now();
    const int code = run_cli(base + "'" + (root / "a").string() + "'");
    const double secs = seconds_since(t0);
    c.expect(code == 0, fmt::format("eval exited {}", code));
    c.expect(secs < 60.0, fmt::format("eval took {:.1f} s", secs));

    const auto report = lines_of(slurp(root / "a" / "report.csv"));
    c.expect(!report.empty() && report[0] == "image,f_beta,s_measure,mae,bde,patch_count,gt_degenerate,status,error",
             "report.csv header");
    c.expect(report.size() == 11, fmt::format("report.csv has {} lines", report.size()));
    for (std::size_t i = 1; i < report.size(); ++i) {
        c.expect(std::count(report[i].begin(), report[i].end(), ',') == 8 &&
                     report[i].find(",ok,") != std::string::npos,
                 "report row: " + report[i]);
    }
    const std::string summary = slurp(root / "a" / "summary.md");
    c.expect(summary.rfind("# Evaluation summary", 0) == 0 && summary.find("| MAE |") != std::string::npos &&
                 summary.find("| 10 | 10 | 0 | 0 |") != std::string::npos,
             "summary.md layout");
    std::vector<std::string> pr_files;
    for (int i = 0; i < 10; ++i) pr_files.push_back("pr/img" + std::to_string(100 + i) + ".tsv");
    pr_files.push_back("pr_mean.tsv");
    for (const auto& f : pr_files) {
        const auto lines = lines_of(slurp(root / "a" / f));
        c.expect(lines.size() == 257 && lines[0] == "threshold\tprecision\trecall", f + " layout");
    }

    const int again = run_cli(base + "'" + (root / "b").string() + "'");
    c.expect(again == 0, fmt::format("rerun exited {}", again));
    std::vector<std::string> compared = {"report.csv", "summary.md"};
    compared.insert(compared.end(), pr_files.begin(), pr_files.end());
    for (int i = 0; i < 10; ++i) compared.push_back("maps/img" + std::to_string(100 + i) + ".png");
    for (const auto& f : compared) {
        c.expect(fs::exists(root / "a" / f) && slurp(root / "a" / f) == slurp(root / "b" / f), f + " differs on rerun");
    }
    note = fmt::format("10 images at 1920x1080, {:.1f} s with {} job(s)", secs, jobs);
    fs::remove_all(root);
    return c;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Check(std::string&)> run;
    };
    const std::vector<Criterion> criteria = {
        {"metric oracle suite", metric_oracles},
        {"BDE oracle", bde_oracle},
        {"APS coverage", aps_coverage},
        {"APS determinism and arithmetic", aps_determinism},
        {"fusion identity", fusion_identity},
        {"fusion permutation invariance", fusion_permutation},
        {"S-measure dual implementation", s_measure_dual},
        {"end-to-end smoke and budget", end_to_end},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string note;
        Check result;
        try {
            result = criteria[i].run(note);
        } catch (const std::exception& e) {
            result.expect(false, std::string("exception: ") + e.what());
        }
        if (result.ok()) {
            fmt::print("PASS {} {} ({})\n", i + 1, criteria[i].name, note);
        } else {
            ++failed;
            fmt::print("FAIL {} {}: {}\n", i + 1, criteria[i].name, result.detail());
        }
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
