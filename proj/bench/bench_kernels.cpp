#include "boldplay/coupling.hpp"
#include "boldplay/q_solver.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <iomanip>
#include <iostream>

using namespace boldplay;

namespace {

template <class F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP kernel timings"};
    std::size_t depth = 80, states = 2'000'000, samples = 200'000;
    std::vector<int> threads{1, 2, 4};
    bool quick = false;
    app.add_option("--depth", depth);
    app.add_option("--states", states);
    app.add_option("--samples", samples);
    app.add_option("--threads", threads)->delimiter(',');
    app.add_flag("--quick", quick, "small sizes, for smoke runs");
    CLI11_PARSE(app, argc, argv);
    if (quick) {
        depth = 24;
        states = 20'000;
        samples = 2'000;
    }

    const GameParams p(EllSpec::parse("sqrt(1/5)"), mpq_class(1, 4));
    const Fortune f = parse_linear_form("1/2", p.ell);
    const Budget b{depth, states, mpq_class("1/1000000000000")};
    std::cout << std::fixed << std::setprecision(4);
    std::cout << "kernel,threads,seconds,states,sweeps,width\n";

    QResult serial;
    const double ts = seconds([&] { serial = q_bounds(p, f, b, SweepKernel::Serial); });
    std::cout << "serial,1," << ts << "," << serial.stats.states << "," << serial.stats.sweeps << ","
              << std::scientific << serial.interval.width().get_d() << std::fixed << "\n";
    bool consistent = true;
    for (int t : threads) {
        omp_set_num_threads(t);
        QResult par;
        const double tp = seconds([&] { par = q_bounds(p, f, b, SweepKernel::Parallel); });
        consistent = consistent && par.interval.intersects(serial.interval);
        std::cout << "parallel," << t << "," << tp << "," << par.stats.states << "," << par.stats.sweeps
                  << "," << std::scientific << par.interval.width().get_d() << std::fixed << "\n";
    }

    const Fortune f2 = parse_linear_form("1/4", p.ell);
    std::cout << "\nmonte_carlo,threads,seconds,estimate\n";
    double reference = -1;
    for (int t : threads) {
        omp_set_num_threads(t);
        MonteCarloResult mc;
        const double tm = seconds([&] { mc = monte_carlo_diff(f, f2, p, samples, 200, 1); });
        if (reference < 0) reference = mc.estimate;
        consistent = consistent && mc.estimate == reference;
        std::cout << "monte_carlo," << t << "," << tm << "," << mc.estimate << "\n";
    }
    if (!consistent) {
        std::cerr << "kernels disagree\n";
        return 1;
    }
    return 0;
}
