#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>

#include "spincool/config.hpp"
#include "spincool/errors.hpp"

using namespace spincool;

namespace {

// A config exercising every optional field, for round-trip checks.
RunConfig decked_out() {
  RunConfig c = preset_config("fig3");
  c.J_x = 0.125;
  c.boundary = Boundary::open;
  c.trap_bond = 2;
  c.trap_J = 1e-7;
  c.bath_mask = "10110101";
  c.t_1 = 0.5;
  c.t_2 = 5.25;
  c.dtau = 0.05;  // (n_steps - 1) * dtau must stay inside T
  c.stopping = true;
  c.stopping_k = 7;
  c.initial_state = InitialState::haar_product;
  c.eta_e.reset();
  c.p_err = 1.23456789e-4;
  c.seed = 18446744073709551615ull;
  c.out_dir = "runs/trial_1";
  return c;
}

std::string error_text(const std::string& text) {
  try {
    parse_config(text, "doc");
  } catch (const config_error& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("reference presets parse and carry their quoted parameters") {
  const auto c = preset_config("fig2a");
  CHECK(c.n_system == 8);
  CHECK(c.J == 1.0);
  CHECK(c.h_x == 1.0);
  CHECK(c.h_z == 0.2);
  CHECK(c.J_x == 0.0);
  CHECK(c.boundary == Boundary::periodic);
  CHECK(c.T == 6.0);
  CHECK(c.B_i == 5.0);
  CHECK(c.B_f == 0.7);
  CHECK(c.g_0 == 0.5);
  CHECK(c.n_steps == 101);
  CHECK(c.n_cycles == 100);
  CHECK(c.n_init == 100);
  REQUIRE(c.eta_e.has_value());
  CHECK(*c.eta_e == 0.0);
  CHECK(!c.p_err.has_value());

  const auto& names = preset_names();
  for (const char* required : {"fig2a", "fig3", "fig5", "fig6", "fig9"})
    CHECK(std::count(names.begin(), names.end(), std::string(required)) == 1);
  for (const auto& name : names) {
    CAPTURE(name);
    CHECK_NOTHROW(preset_config(name));
  }

  const auto pm = preset_config("fig3-pm");
  CHECK(pm.J == 0.5);
  CHECK(pm.h_x == 1.0);
  CHECK(pm.n_init == 1000);

  const auto trap = preset_config("fig5");
  CHECK(trap.boundary == Boundary::open);
  CHECK(trap.trap_bond == 3);
  CHECK(trap.trap_J == 0.33);

  const auto robust = preset_config("fig9");
  CHECK(robust.J_x == 0.2);

  CHECK_THROWS_AS(preset_config("fig1"), config_error);
}

TEST_CASE("noise keys are exclusive within a document") {
  const std::string text =
      "n_system = 4\nJ = 1\nh_x = 0.5\nh_z = 0\nT = 6\nB_i = 5\nB_f = 0.7\n"
      "g_0 = 0.5\nn_steps = 11\nn_cycles = 2\nn_init = 1\n"
      "p_err = 1e-4\n"
      "eta_e = 1e-2\n";
  const auto msg = error_text(text);
  CHECK(contains(msg, "line 13"));
  CHECK(contains(msg, "line 12"));
  CHECK(contains(msg, "p_err"));
  CHECK(contains(msg, "eta_e"));
}

TEST_CASE("an empty document reports everything that is missing") {
  const auto msg = error_text("");
  CHECK(contains(msg, "missing required keys"));
  for (const char* key : {"n_system", "J", "h_x", "h_z", "T", "B_i", "B_f",
                          "g_0", "n_steps", "n_cycles", "n_init"})
    CHECK(contains(msg, key));
  CHECK(contains(msg, "p_err/eta_e"));
}

TEST_CASE("malformed documents are rejected with their location") {
  CHECK(contains(error_text("n_system = 8\nwat = 1\n"), "line 2"));
  CHECK(contains(error_text("n_system = 8\nwat = 1\n"), "unknown key 'wat'"));
  CHECK(contains(error_text("J = 1\nJ = 2\n"), "already set on line 1"));
  CHECK(contains(error_text("just some words\n"), "expected 'key = value'"));
  CHECK(contains(error_text("J =\n"), "expected 'key = value'"));

  // Comments and blank lines do not shift the reported numbers.
  const auto msg = error_text("# header\n\nJ = 1\n\n# more\nJ = 2\n");
  CHECK(contains(msg, "line 6"));
  CHECK(contains(msg, "already set on line 3"));
}

TEST_CASE("values are validated with key and location in the message") {
  const std::string base =
      "J = 1\nh_x = 0.5\nh_z = 0\nT = 6\nB_i = 5\nB_f = 0.7\ng_0 = 0.5\n"
      "n_steps = 11\nn_cycles = 2\nn_init = 1\neta_e = 0\n";
  const auto with = [&](const std::string& extra) {
    return error_text(base + extra);
  };
  CHECK(contains(with("n_system = eight\n"), "expects an integer"));
  CHECK(contains(with("n_system = eight\n"), "line 12"));
  CHECK(contains(with("n_system = 1\n"), "[2, 12]"));
  CHECK(contains(with("n_system = 13\n"), "[2, 12]"));
  CHECK(contains(with("n_system = 8\nboundary = moebius\n"),
                 "periodic or open"));
  CHECK(contains(with("n_system = 8\nstopping = yes\n"), "on or off"));
  CHECK(contains(with("n_system = 8\ninitial_state = thermal\n"),
                 "random_basis, haar_product or ground"));
  CHECK(contains(with("n_system = 8\nseed = -3\n"), "non-negative"));
  CHECK(contains(with("n_system = 8\nbath_mask = 0101\n"),
                 "one character per system site"));
  CHECK(contains(with("n_system = 8\nbath_mask = 0101o1o1\n"), "0 or 1"));
  CHECK(contains(with("n_system = 8\nbath_mask = 00000000\n"),
                 "at least one"));
  CHECK(contains(with("n_system = 4\ntrap_bond = 9\n"), "trap bond"));

  // Noise bounds, both parametrizations.
  const std::string noiseless =
      "n_system = 4\nJ = 1\nh_x = 0.5\nh_z = 0\nT = 6\nB_i = 5\nB_f = 0.7\n"
      "g_0 = 0.5\nn_steps = 11\nn_cycles = 2\nn_init = 1\n";
  CHECK(contains(error_text(noiseless + "p_err = 1.5\n"), "[0, 1]"));
  CHECK(contains(error_text(noiseless + "eta_e = -1\n"), ">= 0"));
  CHECK(contains(error_text(noiseless + "eta_e = 44\n"), "above 1"));

  // Schedule and sweep violations surface through the engine constructors.
  CHECK_THROWS_AS(parse_config(noiseless + "eta_e = 0\nt_1 = 5\nt_2 = 2\n"),
                  config_error);
  CHECK_THROWS_AS(parse_config(noiseless + "eta_e = 0\ndtau = 4\n"),
                  config_error);
}

TEST_CASE("later documents override earlier ones") {
  const auto base = parse_config_doc(preset_text("fig3"), "fig3");

  const auto over1 = parse_config_doc("eta_e = 1e-2\nseed = 42\n", "cli");
  const auto c1 = build_config({base, over1});
  CHECK(*c1.eta_e == 1e-2);
  CHECK(c1.seed == 42);
  CHECK(c1.J == 1.0);

  // Switching parametrization across documents replaces, not conflicts.
  const auto over2 = parse_config_doc("p_err = 1e-4\n", "cli");
  const auto c2 = build_config({base, over2});
  CHECK(!c2.eta_e.has_value());
  REQUIRE(c2.p_err.has_value());
  CHECK(*c2.p_err == 1e-4);

  // And back again, through a third layer.
  const auto over3 = parse_config_doc("eta_e = 5e-3\n", "cli2");
  const auto c3 = build_config({base, over2, over3});
  CHECK(!c3.p_err.has_value());
  CHECK(*c3.eta_e == 5e-3);
}

TEST_CASE("rendered configs parse back to the same value") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const auto c = preset_config(name);
    const auto text = render_config(c);
    CHECK(parse_config(text, name + "-rendered") == c);
  }
  const auto c = decked_out();
  CHECK(parse_config(render_config(c)) == c);
  // Idempotent: rendering the reparsed config changes nothing.
  CHECK(render_config(parse_config(render_config(c))) == render_config(c));
}

TEST_CASE("engine views mirror the config") {
  const auto c = preset_config("fig5");

  const auto model = model_from(c);
  CHECK(model.n_system == 8);
  CHECK(model.boundary == Boundary::open);
  REQUIRE(model.zz_bonds.size() == 7);
  CHECK(model.zz_bonds[3].J == 0.33);
  CHECK(model.zz_bonds[2].J == 1.0);
  CHECK(model.n_bath() == 8);

  const auto schedule = schedule_from(c);
  CHECK(schedule.T == 6.0);
  CHECK(schedule.t1 == doctest::Approx(1.5));
  CHECK(schedule.t2 == doctest::Approx(4.5));

  const auto sweep = sweep_from(c);
  CHECK(sweep.n_steps == 101);
  CHECK(sweep.dtau == doctest::Approx(6.0 / 101));

  // eta_e = 2e-2 over 101 steps, two insertion points per step.
  CHECK(p_err_of(c) == doctest::Approx(2e-2 / 202).epsilon(1e-14));
  CHECK(eta_e_of(c) == 2e-2);

  RunConfig direct = c;
  direct.eta_e.reset();
  direct.p_err = 1e-4;
  CHECK(p_err_of(direct) == 1e-4);
  CHECK(eta_e_of(direct) == doctest::Approx(202e-4).epsilon(1e-14));

  const auto spec = protocol_from(direct);
  CHECK(spec.noise.p_err == 1e-4);
  CHECK(spec.n_cycles == 100);
  CHECK(spec.stopping == StoppingMode::off);
  CHECK(spec.model.zz_bonds.size() == 7);

  RunConfig masked = preset_config("fig3");
  masked.bath_mask = "10101010";
  const auto partial = model_from(masked);
  CHECK(partial.n_bath() == 4);
  CHECK(partial.bath_mask[0]);
  CHECK(!partial.bath_mask[1]);

  RunConfig stopping = preset_config("fig3");
  stopping.stopping = true;
  stopping.stopping_k = 3;
  const auto sspec = protocol_from(stopping);
  CHECK(sspec.stopping == StoppingMode::stop);
  CHECK(sspec.stopping_k == 3);
}

TEST_CASE("files load with io errors distinct from parse errors") {
  CHECK_THROWS_AS(load_config("/nonexistent/nowhere.cfg"), io_error);
}
