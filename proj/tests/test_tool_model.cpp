#include <tooltree/drafting.hpp>
#include <tooltree/registry.hpp>
#include <tooltree/retrieval.hpp>

#include <catch_amalgamated.hpp>

#include <string>

using namespace tooltree;

namespace {

ToolCard card(std::string name, std::vector<InputField> in, std::vector<OutputField> out, std::string desc = "a tool")
{
    ToolCard c;
    c.name = std::move(name);
    c.description = std::move(desc);
    c.inputs = std::move(in);
    c.outputs = std::move(out);
    return c;
}

ToolOutput text_out(const std::string& field, const std::string& v)
{
    ToolOutput o;
    o.payload[field] = TypedValue{SchemaType::text(), v};
    return o;
}

} // namespace

TEST_CASE("registry insertion and duplicates")
{
    ToolRegistry r;
    auto ocr = card("ocr", {{"image", SchemaType::image_ref()}}, {{"text", SchemaType::text()}});
    auto r1 = register_tool(r, ocr);
    CHECK(r1.size() == 1);
    CHECK_THROWS_AS(register_tool(r1, ocr), DuplicateName);
    auto r2 = register_tool(r1, card("calc", {{"expr", SchemaType::text()}}, {{"value", SchemaType::number()}}));
    CHECK(r2.size() == 2);
    CHECK(r2.at("ocr") == ocr);
    CHECK(r.empty());
}

TEST_CASE("invalid cards are rejected with named violations")
{
    auto c = card("", {{"x", SchemaType::text()}}, {{"y", SchemaType::text()}});
    auto v = validate_card(c);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "name empty");
    CHECK_THROWS_AS(register_tool({}, c), InvalidCard);

    auto d = card("calc", {{"a", SchemaType::number()}, {"b", SchemaType::number()}}, {{"v", SchemaType::number()}});
    d.examples.push_back({{{"a", 1}}, {{"v", 1}}});
    v = validate_card(d);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("b") != std::string::npos);

    CHECK_FALSE(validate_card(card("s", {{"x", SchemaType::structured({})}}, {})).empty());
}

TEST_CASE("medical detection card loads and validates")
{
    auto c = load_card(std::string(TOOLTREE_TEST_DATA) + "/medical_object_detection.json");
    CHECK(c.name == "Medical_Object_Detection");
    CHECK(validate_card(c).empty());
    REQUIRE(c.input("image"));
    CHECK(c.input("image")->type == SchemaType::image_ref());
    CHECK(c.input("image")->required);
    CHECK_FALSE(c.input("prompt")->required);
    CHECK(c.examples.size() == 1);
    CHECK(card_from_json(card_to_json(c)) == c);
}

TEST_CASE("schema descriptors round-trip")
{
    auto s = SchemaType::structured({{"b", SchemaType::number()}, {"a", SchemaType::audio_ref()}});
    CHECK(schema_from_json(schema_to_json(s)) == s);
    CHECK(schema_to_json(SchemaType::image_ref()) == "image-ref");
    CHECK(s == SchemaType::structured({{"a", SchemaType::audio_ref()}, {"b", SchemaType::number()}}));
}

TEST_CASE("admissibility")
{
    Context ctx;
    ctx.query = "how many wheels";
    ctx.attachments.push_back({"photo", {SchemaType::image_ref(), "img:1"}});
    CHECK(is_admissible(ctx, card("det", {{"image", SchemaType::image_ref()}}, {})));

    Context text_only;
    text_only.query = "transcribe this";
    CHECK_FALSE(is_admissible(text_only, card("asr", {{"audio", SchemaType::audio_ref()}}, {})));

    ToolOutput n;
    n.payload["count"] = TypedValue{SchemaType::number(), 4};
    auto with_num = text_only.with({"counter", {}, n});
    auto two = card("fmt", {{"n", SchemaType::number()}, {"label", SchemaType::text()}}, {});
    CHECK(is_admissible(with_num, two));
    CHECK_FALSE(is_admissible(text_only, two));
    auto opt = card("opt", {{"n", SchemaType::number(), false}}, {});
    CHECK(is_admissible(text_only, opt));
}

TEST_CASE("admissibility is monotone in history")
{
    Context ctx;
    ctx.query = "q";
    auto c = card("t", {{"x", SchemaType::text()}}, {});
    REQUIRE(is_admissible(ctx, c));
    for (int i = 0; i < 5; ++i) {
        ctx = ctx.with({"e", {}, i % 2 ? ToolOutput::error("boom") : text_out("t", std::to_string(i))});
        CHECK(is_admissible(ctx, c));
    }
}

TEST_CASE("drafting binds the most recent compatible value")
{
    Context ctx;
    ctx.query = "distance?";
    ctx = ctx.with({"ocr", {}, text_out("text", "343 km")});
    auto calc = card("calc", {{"expr", SchemaType::text()}}, {{"v", SchemaType::number()}});
    auto d = draft_arguments(ctx, calc);
    CHECK(d.bindings.at("expr") == Binding{OutputRef{0, "text"}});
    CHECK(draft_is_valid(d, calc, ctx));

    ctx = ctx.with({"ocr2", {}, text_out("text", "12 mi")});
    // exhaustive enumeration: the candidate with the largest history index wins
    std::size_t best = 0;
    for (std::size_t i = 0; i < ctx.history.size(); ++i) {
        if (ctx.history[i].output.ok()) best = i;
    }
    d = draft_arguments(ctx, calc);
    CHECK(d.bindings.at("expr") == Binding{OutputRef{best, "text"}});
    CHECK(draft_arguments(ctx, calc) == d);

    Context none;
    CHECK_THROWS_AS(draft_arguments(none, card("asr", {{"a", SchemaType::audio_ref()}}, {})), NotAdmissible);
}

TEST_CASE("drafting skips error outputs and falls back to the query")
{
    Context ctx;
    ctx.query = "q";
    ctx = ctx.with({"bad", {}, ToolOutput::error("timeout")});
    auto c = card("t", {{"x", SchemaType::text()}}, {});
    CHECK(draft_arguments(ctx, c).bindings.at("x") == Binding{QueryTextRef{}});
}

TEST_CASE("canonical cache keys")
{
    ArgumentDraft ba, ab;
    ba.bindings.emplace("b", Literal{2});
    ba.bindings.emplace("a", Literal{1});
    ab.bindings.emplace("a", Literal{1});
    ab.bindings.emplace("b", Literal{2});
    CHECK(canonical_cache_key("calc", ba) == canonical_cache_key("calc", ab));

    ArgumentDraft a1, a2;
    a1.bindings.emplace("a", Literal{1});
    a2.bindings.emplace("a", Literal{2});
    CHECK(canonical_cache_key("calc", a1) != canonical_cache_key("calc", a2));
    CHECK(canonical_cache_key("calc", a1) != canonical_cache_key("ocr", a1));
}

TEST_CASE("cache keys are injective over a small alphabet")
{
    std::vector<nlohmann::json> values{1, 2, "1", nullptr};
    std::vector<std::string> tools{"a", "b"};
    std::map<std::string, std::pair<std::string, ArgumentDraft>> seen;
    for (const auto& t : tools) {
        for (const auto& x : values) {
            for (const auto& y : values) {
                for (int shape = 0; shape < 3; ++shape) {
                    ArgumentDraft d;
                    if (shape != 1) d.bindings.emplace("x", Literal{x});
                    if (shape != 2) d.bindings.emplace("y", Literal{y});
                    auto key = canonical_cache_key(t, d);
                    auto [it, fresh] = seen.emplace(key, std::make_pair(t, d));
                    if (!fresh) {
                        CHECK(it->second.first == t);
                        CHECK(it->second.second == d);
                    }
                }
            }
        }
    }
}

TEST_CASE("reference keys normalize to history indices")
{
    ArgumentDraft d1, d2;
    d1.bindings.emplace("x", OutputRef{0, "text"});
    d2.bindings.emplace("x", OutputRef{1, "text"});
    CHECK(canonical_cache_key("t", d1) != canonical_cache_key("t", d2));

    Context ctx;
    ctx.query = "q";
    ctx = ctx.with({"a", {}, text_out("text", "same")}).with({"b", {}, text_out("text", "same")});
    CHECK(execution_cache_key("t", d1, ctx) == execution_cache_key("t", d2, ctx));
}

TEST_CASE("lexical shortlist")
{
    auto reg = make_registry({
        card("unit_converter", {{"q", SchemaType::text()}}, {}, "convert a quantity between units such as kilometers and miles"),
        card("image_captioner", {{"i", SchemaType::image_ref()}}, {}, "describe the content of a picture"),
        card("calculator", {{"q", SchemaType::text()}}, {}, "evaluate arithmetic expressions"),
    });
    auto top = retrieve_shortlist("convert kilometers to miles", reg, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].name == "unit_converter");
    CHECK(top[1].name == "calculator");

    auto all = retrieve_shortlist("convert kilometers to miles", reg, 10);
    CHECK(all.size() == 3);

    auto none = retrieve_shortlist("zebra", reg, 3);
    REQUIRE(none.size() == 3);
    CHECK(none[0].name == "calculator");
    CHECK(none[1].name == "image_captioner");
    CHECK(none[2].name == "unit_converter");

    CHECK(retrieve_shortlist("x", ToolRegistry{}, 5).empty());
    CHECK(retrieve_shortlist("convert kilometers to miles", reg, 3) == all);
}
