#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "agn/error.hpp"
#include "agn/rng.hpp"
#include "agn/theory.hpp"

namespace agn {

std::pair<double, std::size_t> parallel_min(std::size_t n, std::size_t threads,
                                            const std::function<double(std::size_t)>& work,
                                            std::size_t* violations, double threshold) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<std::size_t>(threads, std::max<std::size_t>(n, 1));
    std::mutex mu;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    std::size_t bad = 0;
    std::exception_ptr failure;

    auto shard = [&](std::size_t t) {
        double local = std::numeric_limits<double>::infinity();
        std::size_t local_index = 0;
        std::size_t local_bad = 0;
        try {
            for (std::size_t i = t; i < n; i += threads) {
                const double s = work(i);
                if (s < threshold || std::isnan(s)) ++local_bad;
                if (s < local || std::isnan(s)) {
                    local = std::isnan(s) ? -std::numeric_limits<double>::infinity() : s;
                    local_index = i;
                }
            }
        } catch (...) {
            std::lock_guard lock(mu);
            if (!failure) failure = std::current_exception();
            return;
        }
        std::lock_guard lock(mu);
        bad += local_bad;
        if (local < best || (local == best && local_index < best_index)) {
            best = local;
            best_index = local_index;
        }
    };

    if (threads == 1) {
        shard(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(shard, t);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    if (violations) *violations = bad;
    return {best, best_index};
}

namespace {

struct Tuple {
    NetworkParams params;
    std::vector<double> x;
    int y = 1;
    Comparator comparator;
    double gamma = 0.5;
};

// Random (W, x, y, v*, gamma) with a balanced fixed outer layer.
Tuple random_tuple(std::uint64_t seed, ActivationKind activation) {
    Rng rng(seed);
    Tuple t;
    const std::size_t m = 1 + rng.below(32);
    const std::size_t d = 1 + rng.below(6);
    NetworkConfig config;
    config.width = m;
    config.input_dim = d;
    config.activation = activation;
    config.leaky_slope = rng.below(8) == 0 ? 1.0 : 0.01 + 0.99 * rng.uniform();
    config.init_variance = std::exp(rng.uniform() * 5.0 - 3.0);
    config.outer_magnitude = rng.below(2) == 0 ? 1.0 / std::sqrt(static_cast<double>(m))
                                               : std::exp(rng.uniform() * 2.0 - 1.0);
    config.permute_outer = true;
    t.params = initialize_network(config, rng);

    t.x.resize(d);
    const double scale = std::exp(rng.uniform() * 3.0 - 1.5);
    if (rng.below(100) != 0) {
        for (double& v : t.x) v = scale * rng.normal();
    }
    t.y = rng.below(2) == 0 ? 1 : -1;
    std::vector<double> v(d);
    rng.unit_vector(v);
    t.comparator = make_comparator(t.params.outer_weights, v);
    t.gamma = 0.01 + 0.99 * rng.uniform();
    return t;
}

template <typename Fn>
SuiteReport run_suite(std::string name, std::size_t tuples, std::uint64_t seed, std::size_t threads,
                      double threshold, Fn&& slack_of) {
    if (tuples == 0) throw InvalidArgument("suite '" + name + "' needs at least one tuple");
    const auto start = std::chrono::steady_clock::now();
    SuiteReport r;
    r.name = std::move(name);
    r.tuples = tuples;
    r.seed = seed;
    r.threshold = threshold;
    const auto [slack, index] = parallel_min(
        tuples, threads, [&](std::size_t i) { return slack_of(derive_seed(seed, i)); }, &r.violations,
        threshold);
    r.min_slack = slack;
    r.worst_index = index;
    r.worst_seed = derive_seed(seed, index);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace

SuiteReport run_key_identity_suite(std::size_t tuples, std::uint64_t seed, std::size_t threads) {
    return run_suite("key_identity", tuples, seed, threads, -1e-9, [](std::uint64_t s) {
        const Tuple t = random_tuple(s, ActivationKind::leaky_relu);
        return verify_key_identity(t.params, t.x, t.y, t.comparator, t.gamma);
    });
}

SuiteReport run_general_identity_suite(std::size_t tuples, std::uint64_t seed, ActivationKind activation,
                                       std::size_t threads) {
    std::string name = "general_identity_" + std::string(to_string(activation));
    return run_suite(std::move(name), tuples, seed, threads, -1e-9, [activation](std::uint64_t s) {
        const Tuple t = random_tuple(s, activation);
        return verify_general_key_identity(t.params, t.x, t.y, t.comparator, t.gamma, t.params.activation_fn())
            .slack;
    });
}

SuiteReport run_identity_implication_suite(std::size_t tuples, std::uint64_t seed, std::size_t threads) {
    return run_suite("identity_implication", tuples, seed, threads, -1e-9, [](std::uint64_t s) {
        const Tuple t = random_tuple(s, ActivationKind::leaky_relu);
        const auto general =
            verify_general_key_identity(t.params, t.x, t.y, t.comparator, t.gamma, t.params.activation_fn());
        const double a = outer_magnitude(t.params);
        const double m = static_cast<double>(t.params.width());
        const double specialized =
            a * t.gamma * std::sqrt(m) * (t.params.leaky_slope - xi_hat(t.comparator.v_star, t.x, t.y, t.gamma));
        return general.rhs - specialized;
    });
}

SuiteReport run_gradient_suite(std::size_t configs, std::uint64_t seed, std::size_t threads,
                               const GradientCheckOptions& options) {
    const LossSpec loss = LossSpec::make(LossKind::cross_entropy);
    return run_suite("gradient", configs, seed, threads, 0.0, [&](std::uint64_t s) {
        Rng rng(s);
        NetworkConfig config;
        config.width = 1 + rng.below(8);
        config.input_dim = 1 + rng.below(4);
        config.leaky_slope = 0.05 + 0.95 * rng.uniform();
        config.init_variance = 1.0;
        config.permute_outer = true;
        // Cycle through every trainable-block combination.
        switch (rng.below(6)) {
            case 0: break;
            case 1: config.biases = true; break;
            case 2: config.outer_trainable = true; break;
            case 3: config.biases = true; config.outer_trainable = true; break;
            case 4: config.hidden_layers = 3; break;
            case 5: config.activation = ActivationKind::tanh; config.biases = rng.below(2) == 0; break;
        }
        if (config.activation != ActivationKind::tanh && rng.below(4) == 0) config.activation = ActivationKind::tanh;
        std::vector<double> x(config.input_dim);
        for (int attempt = 0; attempt < 1000; ++attempt) {
            NetworkParams params = initialize_network(config, rng);
            for (double& v : x) v = rng.normal();
            const bool smooth = params.activation == ActivationKind::tanh;
            if (!smooth && min_preactivation_magnitude(params, x) <= options.kink_margin) continue;
            const int y = rng.below(2) == 0 ? 1 : -1;
            return options.tolerance - gradient_check(params, x, y, loss, options);
        }
        throw Error("gradient suite could not find a kink-free configuration");
    });
}

}  // namespace agn
