// Small end-to-end example: decayed normalized steepest descent on a
// 5-dimensional scaled quadratic, followed by the optimality residuals of
// the point it lands on.

#include <cstdio>

#include "nsdw/nsdw.hpp"

int main() {
    using namespace nsdw;

    Objective obj = make_scaled_quadratic({2.0, -3.0, 1.5, 0.5, -2.5});
    const double lambda = 1.0;

    OptimizerSpec opt;
    opt.kind = OptimizerSpec::Kind::Nsd;
    opt.nsd = NsdConfig{Norm::LInf, lambda, true};

    Vec x0(obj.dim, 0.0);
    RunResult res = run(opt, obj, x0, LrSchedule::fw_rate(lambda), 2000);

    std::printf("final x:");
    for (double v : res.x_final) std::printf(" %.6f", v);
    std::printf("\nfinal loss %.10f\n", obj.eval(res.x_final));

    KKTReport rep = kkt_residual(obj, res.x_final, lambda, Norm::LInf);
    std::printf("feasibility gap      %.3e\n", rep.feasibility_gap);
    std::printf("alignment residual   %.3e\n", rep.alignment_residual);

    ConstrainedMin best = *obj.constrained_min(lambda, Norm::LInf);
    std::printf("constrained optimum  %.10f\n", best.loss);
    return 0;
}
