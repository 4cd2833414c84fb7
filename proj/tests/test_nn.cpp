#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pmarl/common/error.hpp"
#include "pmarl/nn/adam.hpp"
#include "pmarl/nn/checkpoint.hpp"
#include "pmarl/nn/mlp.hpp"
#include "pmarl/nn/policy_head.hpp"

using namespace pmarl;
using namespace pmarl::nn;

namespace {

Mlp fixed_net() {
  Mlp net({2, 3, 2});
  net.weights()[0] << 0.1, -0.2, 0.3, 0.4, -0.5, 0.6;
  net.biases()[0] << 0.01, -0.02, 0.03;
  net.weights()[1] << 0.7, -0.8, 0.9, -1.0, 1.1, -1.2;
  net.biases()[1] << 0.05, -0.05;
  return net;
}

// Values from an autodiff reference for the fixed network above.
TEST_CASE("mlp forward matches reference values") {
  const Mlp net = fixed_net();
  const Vector y = net.forward(Vector{{0.5, -1.5}});
  CHECK(y[0] == doctest::Approx(-0.08460274915967396).epsilon(1e-14));
  CHECK(y[1] == doctest::Approx(0.09184941944277152).epsilon(1e-14));

  Matrix batch(2, 2);
  batch << 0.5, 0.5, -1.5, -1.5;
  const Matrix yb = net.forward_batch(batch);
  CHECK(yb(0, 1) == doctest::Approx(y[0]).epsilon(1e-14));
}

TEST_CASE("mlp backward matches reference gradients") {
  const Mlp net = fixed_net();
  Matrix x(2, 1);
  x << 0.5, -1.5;
  const auto cache = net.forward_cached(x);
  Matrix g(2, 1);
  g << 1.0, -2.0;
  const MlpGradients grads = net.backward(cache, g);
  const double dw0[3][2] = {{1.1891168153584373, -3.567350446075312},
                            {-1.2119720407201393, 3.6359161221604177},
                            {0.573923534210471, -1.721770602631413}};
  const double db0[3] = {2.3782336307168745, -2.4239440814402786, 1.147847068420942};
  const double dw1[2][3] = {{0.34521403413552093, -0.4381993148327678, -0.8075689165786143},
                            {-0.6904280682710419, 0.8763986296655356, 1.6151378331572286}};
  for (int r = 0; r < 3; ++r) {
    CHECK(grads.biases[0][r] == doctest::Approx(db0[r]).epsilon(1e-12));
    for (int c = 0; c < 2; ++c) CHECK(grads.weights[0](r, c) == doctest::Approx(dw0[r][c]).epsilon(1e-12));
  }
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) CHECK(grads.weights[1](r, c) == doctest::Approx(dw1[r][c]).epsilon(1e-12));
  }
  CHECK(grads.biases[1][0] == 1.0);
  CHECK(grads.biases[1][1] == -2.0);
}

TEST_CASE("mlp gradients agree with central differences on random nets") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Mlp net = Mlp::glorot({4, 6, 5, 3}, rng);
    for (auto& b : net.biases()) b.setRandom();
    Matrix x = Matrix::Random(4, 7);
    Matrix g = Matrix::Random(3, 7);
    const MlpGradients grads = net.backward(net.forward_cached(x), g);
    auto loss = [&] { return (net.forward_batch(x).array() * g.array()).sum(); };
    const double h = 1e-6;
    for (int k = 0; k < net.num_layers(); ++k) {
      for (Eigen::Index i = 0; i < net.weights()[k].size(); ++i) {
        double& w = net.weights()[k].data()[i];
        const double saved = w;
        w = saved + h;
        const double up = loss();
        w = saved - h;
        const double down = loss();
        w = saved;
        const double fd = (up - down) / (2 * h);
        const double an = grads.weights[k].data()[i];
        CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("mlp rejects bad shapes and non-finite input") {
  const Mlp net = fixed_net();
  CHECK_THROWS_AS(net.forward(Vector::Zero(3)), ConfigError);
  CHECK_THROWS_AS(net.forward(Vector{{NAN, 0.0}}), InputError);
  CHECK_THROWS_AS(Mlp({3}), ConfigError);
  CHECK(net.parameter_count() == 6 + 3 + 6 + 2);
}

TEST_CASE("glorot init is bounded and output layer is scaled") {
  Rng rng(3);
  const Mlp net = Mlp::glorot({10, 20, 4}, rng, 0.01);
  const double lim0 = std::sqrt(6.0 / 30.0), lim1 = 0.01 * std::sqrt(6.0 / 24.0);
  CHECK(net.weights()[0].cwiseAbs().maxCoeff() <= lim0);
  CHECK(net.weights()[1].cwiseAbs().maxCoeff() <= lim1);
  CHECK(net.weights()[0].cwiseAbs().maxCoeff() > 0.5 * lim0);
  CHECK(net.biases()[0].isZero());
}

// Reference density: two Gaussian controls plus a logit-normal priority.
TEST_CASE("log density includes the sigmoid change of variables") {
  GaussianPolicyHead head(2, 0.0);
  head.set_log_std(Eigen::Vector3d(std::log(0.5), std::log(0.7), std::log(0.9)));
  const Eigen::Vector3d mean(0.1, -0.2, 0.3);
  AgentAction a{Eigen::Vector2d(0.4, 0.1), 0.6};
  const auto full = head.log_prob_and_entropy(mean, a);
  CHECK(full.log_prob == doctest::Approx(-0.45321931939289206).epsilon(1e-13));
  CHECK(full.entropy == doctest::Approx(3.101632959457514).epsilon(1e-13));
  const auto ctrl = head.log_prob_and_entropy(mean, a, ActionScope::ControlOnly);
  CHECK(ctrl.log_prob == doctest::Approx(-1.0598916766045452).epsilon(1e-13));
  CHECK(ctrl.entropy == doctest::Approx(1.7880549419106675).epsilon(1e-13));
}

TEST_CASE("priority at the boundary is a domain error") {
  GaussianPolicyHead head(2, 0.0);
  const Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  CHECK_THROWS_AS(head.log_prob_and_entropy(mean, {Eigen::Vector2d::Zero(), 0.0}), DomainError);
  CHECK_THROWS_AS(head.log_prob_and_entropy(mean, {Eigen::Vector2d::Zero(), 1.0}), DomainError);
  CHECK_THROWS_AS(logit(1.5), DomainError);
}

TEST_CASE("priority density integrates to one") {
  for (double mu : {-2.0, 0.0, 1.5}) {
    for (double sd : {0.3, 1.0, 2.0}) {
      GaussianPolicyHead head(1, 0.0);
      head.set_log_std(Eigen::Vector2d(0.0, std::log(sd)));
      const Eigen::Vector2d mean(0.0, mu);
      // Substitute a = sigmoid(z) to keep the grid dense near the ends.
      const int n = 200000;
      const double lo = -40.0, hi = 40.0, dz = (hi - lo) / n;
      double total = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double z = lo + k * dz;
        const double a = sigmoid(z);
        if (a <= 0.0 || a >= 1.0) continue;
        const double lp = head.log_prob_and_entropy(mean, {Eigen::VectorXd::Zero(1), a}).log_prob;
        const double control_lp = -0.5 * std::log(2 * M_PI);
        const double w = (k == 0 || k == n) ? 0.5 : 1.0;
        total += w * std::exp(lp - control_lp) * a * (1 - a) * dz;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("sampling statistics match the parameters") {
  GaussianPolicyHead head(2, 0.0);
  head.set_log_std(Eigen::Vector3d(std::log(0.5), std::log(1.2), std::log(0.8)));
  const Eigen::Vector3d mean(0.3, -1.0, 0.7);
  Rng rng(123);
  const int n = 1000000;
  double s[3] = {0, 0, 0}, ss[3] = {0, 0, 0};
  for (int k = 0; k < n; ++k) {
    const auto smp = head.sample(mean, rng);
    const double v[3] = {smp.action.control[0], smp.action.control[1], logit(smp.action.priority)};
    for (int d = 0; d < 3; ++d) {
      s[d] += v[d];
      ss[d] += v[d] * v[d];
    }
  }
  const double sd[3] = {0.5, 1.2, 0.8};
  for (int d = 0; d < 3; ++d) {
    const double m = s[d] / n;
    const double var = ss[d] / n - m * m;
    CHECK(std::abs(m - mean[d]) < 5 * sd[d] / std::sqrt(n));
    CHECK(std::abs(std::sqrt(var) - sd[d]) < 5 * sd[d] / std::sqrt(2.0 * n));
  }
}

TEST_CASE("stored sample log-prob equals re-evaluation exactly") {
  GaussianPolicyHead head(2, std::log(0.5));
  Rng rng(5);
  const Eigen::Vector3d mean(0.2, 0.1, -0.4);
  for (int k = 0; k < 1000; ++k) {
    const auto smp = head.sample(mean, rng);
    CHECK(head.log_prob_and_entropy(mean, smp.action).log_prob == smp.log_prob);
    CHECK(smp.action.priority > 0.0);
    CHECK(smp.action.priority < 1.0);
  }
}

TEST_CASE("extreme priority logits stay inside the open interval") {
  GaussianPolicyHead head(2, std::log(0.5));
  Rng rng(6);
  const auto hi = head.sample(Eigen::Vector3d(0, 0, 500.0), rng);
  const auto lo = head.sample(Eigen::Vector3d(0, 0, -500.0), rng);
  CHECK(hi.action.priority < 1.0);
  CHECK(lo.action.priority > 0.0);
  CHECK(std::isfinite(hi.log_prob));
  CHECK(std::isfinite(lo.log_prob));
}

TEST_CASE("log_std is clamped") {
  GaussianPolicyHead head(2, 0.0);
  head.log_std_mut() << -50.0, 10.0, 0.3;
  head.clamp_log_std();
  CHECK(head.log_std()[0] == GaussianPolicyHead::kMinLogStd);
  CHECK(head.log_std()[1] == GaussianPolicyHead::kMaxLogStd);
  CHECK(head.log_std()[2] == 0.3);
}

TEST_CASE("log-prob gradients agree with central differences") {
  GaussianPolicyHead head(2, 0.0);
  head.set_log_std(Eigen::Vector3d(-0.3, 0.2, -0.6));
  Eigen::VectorXd mean = Eigen::Vector3d(0.1, 0.5, -0.2);
  const AgentAction a{Eigen::Vector2d(0.3, -0.1), 0.35};
  for (auto scope : {ActionScope::ControlAndPriority, ActionScope::ControlOnly}) {
    Eigen::VectorXd dm(3), dl(3);
    head.log_prob_gradients(mean, a, scope, dm, dl);
    const double h = 1e-6;
    for (int d = 0; d < 3; ++d) {
      Eigen::VectorXd up = mean, down = mean;
      up[d] += h;
      down[d] -= h;
      const double fd = (head.log_prob_and_entropy(up, a, scope).log_prob -
                         head.log_prob_and_entropy(down, a, scope).log_prob) / (2 * h);
      CHECK(dm[d] == doctest::Approx(fd).epsilon(1e-6));
      GaussianPolicyHead hp = head, hm = head;
      hp.log_std_mut()[d] += h;
      hm.log_std_mut()[d] -= h;
      const double fl =
          (hp.log_prob_and_entropy(mean, a, scope).log_prob - hm.log_prob_and_entropy(mean, a, scope).log_prob) /
          (2 * h);
      CHECK(dl[d] == doctest::Approx(fl).epsilon(1e-6));
    }
  }
}

// Reference: hand-rolled bias-corrected Adam, lr 0.1.
TEST_CASE("adam matches the reference recurrence") {
  std::vector<double> theta{1.0, -2.0};
  AdamState state(AdamConfig{0.1, 0.9, 0.999, 1e-8});
  std::vector<ParamView> params{{"theta", theta}};
  std::vector<double> g1{0.5, -0.1}, g2{-0.3, 0.2};
  adam_step(params, std::vector<GradView>{{"theta", g1}}, state);
  CHECK(theta[0] == doctest::Approx(0.9000000019999999).epsilon(1e-14));
  CHECK(theta[1] == doctest::Approx(-1.900000009999999).epsilon(1e-14));
  adam_step(params, std::vector<GradView>{{"theta", g2}}, state);
  CHECK(theta[0] == doctest::Approx(0.8808501989417751).epsilon(1e-14));
  CHECK(theta[1] == doctest::Approx(-1.9366103603884888).epsilon(1e-14));
  CHECK(state.step == 2);
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
  std::vector<double> theta{0.25, -4.0, 7.0};
  const auto before = theta;
  AdamState state;
  std::vector<ParamView> params{{"w", theta}};
  std::vector<double> zero(3, 0.0);
  for (int k = 0; k < 3; ++k) adam_step(params, std::vector<GradView>{{"w", zero}}, state);
  CHECK(theta == before);
}

TEST_CASE("adam rejects non-finite gradients without touching parameters") {
  std::vector<double> theta{1.0, 2.0};
  const auto before = theta;
  AdamState state;
  std::vector<ParamView> params{{"layer0.w", theta}};
  std::vector<double> bad{0.1, NAN};
  try {
    adam_step(params, std::vector<GradView>{{"layer0.w", bad}}, state);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("layer0.w") != std::string::npos);
  }
  CHECK(theta == before);
  CHECK(state.step == 0);
}

TEST_CASE("global norm clipping") {
  std::vector<double> a{3.0, 0.0}, b{4.0};
  std::vector<ParamView> g{{"a", a}, {"b", b}};
  CHECK(clip_global_norm(g, 1.0) == doctest::Approx(5.0));
  CHECK(a[0] == doctest::Approx(0.6));
  CHECK(b[0] == doctest::Approx(0.8));
  CHECK(clip_global_norm(g, 10.0) == doctest::Approx(1.0));
  CHECK(a[0] == doctest::Approx(0.6));
}

TEST_CASE("checkpoint round trip is bit exact") {
  Rng rng(9);
  const Mlp net = Mlp::glorot({5, 7, 3}, rng, 0.37);
  Checkpoint ckpt;
  ckpt.add("actor", net);
  ckpt.add("log_std", Vector{{-0.1, 1.0 / 3.0, std::log(0.5)}});
  std::stringstream buf;
  ckpt.write(buf);
  const Checkpoint back = Checkpoint::read(buf);
  const Mlp& n2 = back.mlp("actor");
  for (int k = 0; k < net.num_layers(); ++k) {
    CHECK((n2.weights()[k].array() == net.weights()[k].array()).all());
    CHECK((n2.biases()[k].array() == net.biases()[k].array()).all());
  }
  CHECK(back.vector("log_std")[1] == 1.0 / 3.0);
  CHECK_THROWS_AS(back.mlp("critic"), ConfigError);
}

TEST_CASE("truncated checkpoint is rejected") {
  Checkpoint ckpt;
  ckpt.add("v", Vector{{1.0, 2.0, 3.0}});
  std::stringstream buf;
  ckpt.write(buf);
  std::string text = buf.str();
  std::stringstream cut(text.substr(0, text.size() - 6));
  CHECK_THROWS_AS(Checkpoint::read(cut), ConfigError);
}

}  // namespace
