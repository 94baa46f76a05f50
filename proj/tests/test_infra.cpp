#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flashsim/config.hpp"
#include "flashsim/parallel.hpp"
#include "flashsim/rng.hpp"
#include "flashsim/stats.hpp"

using namespace flashsim;

TEST_CASE("rng: determinism and substream independence") {
    Rng a(123), b(123), c(124);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    bool any_diff = false;
    for (int i = 0; i < 100; ++i) any_diff |= (a.next_u64() != c.next_u64());
    CHECK(any_diff);

    Rng s0 = Rng::substream(7, 0), s1 = Rng::substream(7, 1);
    bool differ = false;
    for (int i = 0; i < 10; ++i) differ |= (s0.next_u64() != s1.next_u64());
    CHECK(differ);
}

TEST_CASE("rng: uniform in [0,1), normal moments, exponential mean") {
    Rng rng(99);
    const int n = 200000;
    double umin = 1.0, umax = 0.0, nsum = 0.0, nsq = 0.0, esum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        umin = std::min(umin, u);
        umax = std::max(umax, u);
        const double g = rng.normal();
        nsum += g;
        nsq += g * g;
        esum += rng.exponential(2.0);
    }
    CHECK(umin >= 0.0);
    CHECK(umax < 1.0);
    CHECK(std::abs(nsum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(nsq / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(esum / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("rng: poisson mean and variance") {
    Rng rng(17);
    const int n = 50000;
    const double mean = 6.5;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double k = static_cast<double>(rng.poisson(mean));
        sum += k;
        sq += k * k;
    }
    const double m = sum / n;
    CHECK(m == doctest::Approx(mean).epsilon(0.02));
    CHECK(sq / n - m * m == doctest::Approx(mean).epsilon(0.05));
}

TEST_CASE("parallel: block_sum equals serial reference bit for bit") {
    auto f = [](std::int64_t i) { return std::sin(0.001 * static_cast<double>(i)); };
    for (std::int64_t n : {0L, 1L, 1000L, 1024L, 1025L, 100000L}) {
        CHECK(par::block_sum(n, f) == par::block_sum_serial(n, f));
    }
}

TEST_CASE("parallel: parallel_for writes every slot once") {
    std::vector<int> hits(5000, 0);
    par::parallel_for(5000, [&](std::int64_t i) { hits[static_cast<std::size_t>(i)] += 1; });
    for (int h : hits) CHECK(h == 1);
}

TEST_CASE("stats: chi2 survival sanity") {
    // known quantiles: P(chi2_1 >= 3.841) ~ 0.05, P(chi2_10 >= 23.21) ~ 0.01
    CHECK(stats::chi2_sf(3.841, 1.0) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(stats::chi2_sf(23.209, 10.0) == doctest::Approx(0.01).epsilon(0.01));
}

TEST_CASE("stats: chi-square GOF accepts true Poisson, rejects shifted") {
    Rng rng(31);
    std::vector<std::uint64_t> counts;
    for (int i = 0; i < 20000; ++i) counts.push_back(rng.poisson(20.0));
    CHECK(stats::chi2_poisson_gof(counts, 20.0).p_value > 0.01);
    CHECK(stats::chi2_poisson_gof(counts, 23.0).p_value < 1e-6);
}

TEST_CASE("stats: two-sample KS accepts same law, rejects offset") {
    Rng rng(77);
    std::vector<double> a, b, c;
    for (int i = 0; i < 4000; ++i) {
        a.push_back(rng.normal());
        b.push_back(rng.normal());
        c.push_back(rng.normal() + 0.2);
    }
    CHECK(stats::ks_two_sample(a, b).p_value > 0.01);
    CHECK(stats::ks_two_sample(a, c).p_value < 1e-4);
}

TEST_CASE("config: sections, types, comments") {
    Config cfg = Config::parse(
        "# run settings\n"
        "top = 3\n"
        "[model]\n"
        "kind = grw\n"
        "alpha = 10.5\n"
        "periodic = true\n"
        "[model.grid]\n"
        "x_min = -4.0\n");
    CHECK(cfg.get_int("top") == 3);
    CHECK(cfg.get_string("model.kind") == "grw");
    CHECK(cfg.get_double("model.alpha") == doctest::Approx(10.5));
    CHECK(cfg.get_bool("model.periodic", false));
    CHECK(cfg.get_double("model.grid.x_min") == doctest::Approx(-4.0));
    CHECK_NOTHROW(cfg.reject_unconsumed());
}

TEST_CASE("config: strict parsing rejects unknown keys and bad values") {
    Config cfg = Config::parse("[model]\nkind = grw\ntypo_key = 1\n");
    CHECK(cfg.get_string("model.kind") == "grw");
    CHECK_THROWS_AS(cfg.reject_unconsumed(), ConfigError);

    Config bad = Config::parse("x = not_a_number\n");
    CHECK_THROWS_AS(bad.get_double("x"), ConfigError);

    CHECK_THROWS_AS(Config::parse("[unterminated\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("novalue\n"), ConfigError);

    Config missing = Config::parse("a = 1\n");
    CHECK_THROWS_AS(missing.get_string("b"), ConfigError);
}

TEST_CASE("config: infinity spelling for beta limits") {
    Config cfg = Config::parse("beta = inf\n");
    CHECK(std::isinf(cfg.get_double("beta")));
}

TEST_CASE("config: random junk either parses or raises ConfigError") {
    Rng rng(2024);
    const std::string alphabet = "ab=[]#.\n 0123_\t-";
    for (int rep = 0; rep < 500; ++rep) {
        std::string text;
        const int len = static_cast<int>(rng.next_u64() % 64);
        for (int i = 0; i < len; ++i)
            text += alphabet[static_cast<std::size_t>(rng.next_u64() % alphabet.size())];
        try {
            Config cfg = Config::parse(text);
            (void)cfg.raw();
        } catch (const ConfigError&) {
            // rejected loudly; anything else escaping would fail the test
        }
    }
    CHECK(true);
}
