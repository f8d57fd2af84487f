#include <doctest.h>

#include <random>

#include "laneirl/dynamics.hpp"
#include "oracles.hpp"

using namespace laneirl;

TEST_CASE("unicycle step matches the closed form") {
  const State a = dynamics::step(State{0, 0, 0}, Control{1.0, 0.0}, 0.1);
  CHECK(a.x == doctest::Approx(0.1));
  CHECK(a.y == doctest::Approx(0.0));
  CHECK(a.psi == doctest::Approx(0.0));

  const State b = dynamics::step(State{0, 0, kPi / 2}, Control{2.0, 0.0}, 0.1);
  CHECK(b.x == doctest::Approx(0.0));
  CHECK(b.y == doctest::Approx(0.2));
  CHECK(b.psi == doctest::Approx(kPi / 2));

  const State c = dynamics::step(State{0, 0, 0}, Control{0.0, 0.5}, 0.1);
  CHECK(c.x == doctest::Approx(0.0));
  CHECK(c.y == doctest::Approx(0.0));
  CHECK(c.psi == doctest::Approx(0.05));

  CHECK_THROWS_AS(
      dynamics::step(State{0, 0, 0}, Control{std::nan(""), 0.0}, 0.1),
      InvalidValueError);
}

TEST_CASE("rollout constant-speed examples") {
  std::vector<Control> controls(70, Control{1.0, 0.0});
  const auto states = dynamics::rollout(State{0, 0, 0}, controls, 0.1);
  CHECK(states.back().x == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(states.back().y == doctest::Approx(0.0));
  CHECK(states.back().psi == doctest::Approx(0.0));

  std::vector<Control> turning(70, Control{3.0, 0.2});
  const auto turned = dynamics::rollout(State{0, 0, 0}, turning, 0.1);
  CHECK(turned.back().psi == doctest::Approx(wrap_angle(70 * 0.1 * 0.2)).epsilon(1e-12));

  CHECK_THROWS_AS(dynamics::rollout(State{}, std::vector<Control>{}, 0.1),
                  InvalidValueError);
}

TEST_CASE("rollout matches a naive scalar loop") {
  std::vector<Control> controls(70, Control{5.0, 0.1});
  const auto states = dynamics::rollout(State{0, 0, 0}, controls, 0.1);
  double x = 0, y = 0, psi = 0;
  for (int k = 0; k < 70; ++k) {
    x += 0.1 * 5.0 * std::cos(psi);
    y += 0.1 * 5.0 * std::sin(psi);
    psi += 0.1 * 0.1;
  }
  CHECK(states.back().x == doctest::Approx(x).epsilon(1e-12));
  CHECK(states.back().y == doctest::Approx(y).epsilon(1e-12));
  CHECK(states.back().psi == doctest::Approx(wrap_angle(psi)).epsilon(1e-12));
}

TEST_CASE("rollout causality is exact") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<Control> controls;
  for (int k = 0; k < 12; ++k) controls.push_back(Control{5.0 + u(rng), u(rng)});
  const State x0{0.2, -0.1, 0.3};
  const auto base = dynamics::rollout(x0, controls, 0.1);
  for (int j = 0; j < 12; ++j) {
    auto perturbed = controls;
    perturbed[static_cast<std::size_t>(j)].v += 0.25;
    perturbed[static_cast<std::size_t>(j)].omega -= 0.1;
    const auto states = dynamics::rollout(x0, perturbed, 0.1);
    for (int k = 0; k < j; ++k) {
      CHECK(states[static_cast<std::size_t>(k)].x == base[static_cast<std::size_t>(k)].x);
      CHECK(states[static_cast<std::size_t>(k)].y == base[static_cast<std::size_t>(k)].y);
      CHECK(states[static_cast<std::size_t>(k)].psi ==
            base[static_cast<std::size_t>(k)].psi);
    }
    CHECK(states[static_cast<std::size_t>(j)].x != base[static_cast<std::size_t>(j)].x);
  }
}

TEST_CASE("rollout translation equivariance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Control> controls;
  for (int k = 0; k < 40; ++k) controls.push_back(Control{8.0 + u(rng), 0.3 * u(rng)});
  const State x0{1.0, -2.0, 0.4};
  const auto base = dynamics::rollout(x0, controls, 0.1);
  const State shifted{x0.x + 13.5, x0.y - 7.25, x0.psi};
  const auto moved = dynamics::rollout(shifted, controls, 0.1);
  for (std::size_t k = 0; k < base.size(); ++k) {
    CHECK(moved[k].x - base[k].x == doctest::Approx(13.5).epsilon(1e-12));
    CHECK(moved[k].y - base[k].y == doctest::Approx(-7.25).epsilon(1e-12));
    CHECK(moved[k].psi == base[k].psi);
  }
}

TEST_CASE("rollout_sensitivity structure") {
  std::vector<Control> controls(4, Control{3.0, 0.1});
  const Eigen::MatrixXd jac = dynamics::rollout_sensitivity(State{0, 0, 0}, controls, 0.1);
  REQUIRE(jac.rows() == 12);
  REQUIRE(jac.cols() == 8);
  // d x_1 / d v_0 = dt at psi_0 = 0.
  CHECK(jac(0, 0) == doctest::Approx(0.1));
  // Causality: state k has zero columns for controls after step k.
  for (int k = 0; k < 4; ++k) {
    for (int col = 2 * (k + 1); col < 8; ++col) {
      for (int r = 0; r < 3; ++r) {
        CHECK(jac(3 * k + r, col) == 0.0);
      }
    }
  }
}

TEST_CASE("rollout_sensitivity matches central finite differences") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double h = 1e-6;
  double max_err = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const int k_steps = 10;
    const State x0{u01(rng), u01(rng), 0.5 * (u01(rng) - 0.5)};
    std::vector<Control> controls;
    for (int k = 0; k < k_steps; ++k) {
      controls.push_back(Control{4.0 + 2.0 * u01(rng), 0.4 * (u01(rng) - 0.5)});
    }
    const Eigen::MatrixXd jac = dynamics::rollout_sensitivity(x0, controls, 0.1);
    for (int j = 0; j < 2 * k_steps; ++j) {
      auto up = controls;
      auto dn = controls;
      if (j % 2 == 0) {
        up[static_cast<std::size_t>(j / 2)].v += h;
        dn[static_cast<std::size_t>(j / 2)].v -= h;
      } else {
        up[static_cast<std::size_t>(j / 2)].omega += h;
        dn[static_cast<std::size_t>(j / 2)].omega -= h;
      }
      const auto sp = dynamics::rollout(x0, up, 0.1);
      const auto sm = dynamics::rollout(x0, dn, 0.1);
      for (int k = 0; k < k_steps; ++k) {
        const double fd_x = (sp[static_cast<std::size_t>(k)].x - sm[static_cast<std::size_t>(k)].x) / (2 * h);
        const double fd_y = (sp[static_cast<std::size_t>(k)].y - sm[static_cast<std::size_t>(k)].y) / (2 * h);
        const double fd_psi =
            wrap_angle(sp[static_cast<std::size_t>(k)].psi - sm[static_cast<std::size_t>(k)].psi) / (2 * h);
        max_err = std::max(max_err, std::abs(jac(3 * k + 0, j) - fd_x));
        max_err = std::max(max_err, std::abs(jac(3 * k + 1, j) - fd_y));
        max_err = std::max(max_err, std::abs(jac(3 * k + 2, j) - fd_psi));
      }
    }
  }
  CHECK(max_err < 1e-6);
}
