import pytest
from lxml import etree

from mathkg.core.exceptions import MacroConfigurationError, TexvcSyntaxError, UnresolvedConceptError
from mathkg.formula import Command, Identifier, parse_or_raise
from mathkg.mathml import (
    MATHML_NS,
    EmitOptions,
    MacroEntry,
    MacroTable,
    default_macro_table,
    desugar,
    emit_fragment,
    emit_mathml,
    expand_semantics,
    extract_concepts,
    mathml_violations,
)

# ==============================================================================
# FIXTURES
# ==============================================================================

M = f"{{{MATHML_NS}}}"


@pytest.fixture
def macro_table():
    return default_macro_table()


@pytest.fixture
def linked(macro_table):
    """Options resolving every concept key to a local knowledge-graph URL."""
    return EmitOptions(
        resolve_links=True,
        link_resolver=lambda key: f"https://kg.example/{key}",
        macro_table=macro_table,
    )


def render(texvc: str, opts: EmitOptions | None = None) -> str:
    return emit_fragment(expand_semantics(texvc), opts)


# ==============================================================================
# UNIT TESTS: documents
# ==============================================================================


def test_emit_mathml_document_structure():
    document = emit_mathml(parse_or_raise("x^2"), EmitOptions(source="x^2"))
    root = etree.fromstring(document.encode("utf-8"))

    assert root.tag == f"{M}math"
    assert root.get("display") == "block"
    semantics = root[0]
    assert semantics.tag == f"{M}semantics"
    assert semantics[0].tag == f"{M}msup"
    assert semantics[1].tag == f"{M}annotation"
    assert semantics[1].get("encoding") == "application/x-tex"
    assert semantics[1].text == "x^2"


def test_annotation_defaults_to_printed_texvc():
    root = etree.fromstring(emit_mathml(parse_or_raise("x^2")).encode("utf-8"))

    assert root[0][1].text == "x^{2}"


def test_inline_display():
    document = emit_mathml(parse_or_raise("x"), EmitOptions(display="inline"))

    assert etree.fromstring(document.encode("utf-8")).get("display") == "inline"


def test_output_is_byte_stable():
    """Equal trees give identical bytes, whichever way the scripts were written."""
    first = emit_mathml(parse_or_raise("x^2_i"), EmitOptions(source="x"))
    second = emit_mathml(parse_or_raise("x_i^2"), EmitOptions(source="x"))

    assert first == second
    assert emit_mathml(parse_or_raise("x^2_i")) == emit_mathml(parse_or_raise("x^2_i"))


def test_output_stays_in_presentation_vocabulary():
    formulas = [
        r"\sum_{k=1}^{n} \frac{1}{k^2}",
        r"\left( \sqrt[3]{x} \right)",
        r"\binom{n}{k} \quad \hat{x}",
        r"\text{if } \mathbf{x} \in \mathbb{R}",
        r"\ce{2H2 + O2 -> 2H2O}",
    ]
    for texvc in formulas:
        assert mathml_violations(emit_mathml(parse_or_raise(texvc))) == [], texvc


def test_violations_name_foreign_elements():
    document = f'<math xmlns="{MATHML_NS}"><mtable><mtr/></mtable><mi>x</mi></math>'

    assert mathml_violations(document) == [f"{M}mtable", f"{M}mtr"]


def test_control_characters_never_reach_the_document():
    tree = Command(name="text", args=(Identifier(name="a\x01b"),))

    document = emit_mathml(tree)

    assert mathml_violations(document) == []
    assert etree.fromstring(document.encode("utf-8"))[0][0].text == "a\ufffdb"


def test_violations_reject_malformed_xml():
    with pytest.raises(etree.XMLSyntaxError):
        mathml_violations("<math><mi>x</math>")


# ==============================================================================
# UNIT TESTS: elements
# ==============================================================================


def test_operator_character_mapping():
    assert render("a - b") == "<mrow><mi>a</mi><mo>−</mo><mi>b</mi></mrow>"


def test_large_operators_take_limits():
    fragment = render(r"\sum_{k=1}^{n} k")

    assert fragment.startswith("<mrow><munderover><mo>∑</mo>")


def test_font_variant_reaches_nested_identifiers():
    assert render(r"\mathbf{x_i}") == (
        '<mrow><msub><mi mathvariant="bold">x</mi><mi mathvariant="bold">i</mi></msub></mrow>'
    )


def test_null_delimiter():
    fragment = render(r"\left. x \right|")

    assert fragment.startswith('<mrow><mo fence="true" stretchy="true"/>')


# ==============================================================================
# UNIT TESTS: semantic macros
# ==============================================================================


def test_semantic_macros_render_like_plain_texvc():
    """Without links the semantic spelling and the plain one are indistinguishable."""
    semantic = render(r"\expe^{\iunit z}")
    plain = emit_fragment(parse_or_raise("e^{i z}"))

    assert semantic == plain


@pytest.mark.parametrize("macro", [r"\iunit", r"\cpi", r"\expe", r"\EulerConstant"])
@pytest.mark.parametrize("context", ["{}", "{}^{{2}}", r"\frac{{{}}}{{2}}", r"\sqrt{{{} + x}}"])
def test_every_macro_renders_like_its_desugared_form(macro, context):
    texvc = context.format(macro)
    opts = EmitOptions(source=texvc)

    semantic = emit_mathml(expand_semantics(texvc), opts)
    plain = emit_mathml(parse_or_raise(desugar(texvc)), opts)

    assert semantic == plain


def test_links_use_the_resolver(linked):
    assert render(r"\iunit", linked) == '<mrow href="https://kg.example/imaginary-unit"><mi>i</mi></mrow>'


def test_links_fall_back_to_table_url(macro_table):
    opts = EmitOptions(resolve_links=True, link_resolver=lambda key: None, macro_table=macro_table)

    assert render(r"\cpi", opts) == '<mrow href="https://dlmf.nist.gov/3.12#E1"><mi>π</mi></mrow>'


def test_links_without_resolver_use_fallback():
    assert 'href="https://dlmf.nist.gov/1.9#E1"' in render(r"\iunit", EmitOptions(resolve_links=True))


def test_unresolved_concept_raises():
    table = MacroTable([MacroEntry(name="zetazero", rendered_texvc=r"\zeta", concept_key="zeta-zero")])
    node = expand_semantics(r"\zetazero", table)

    with pytest.raises(UnresolvedConceptError, match="zetazero"):
        emit_fragment(node, EmitOptions(resolve_links=True, macro_table=table))


def test_links_off_by_default():
    assert "href" not in render(r"\iunit + \cpi")


def test_desugar_replaces_macros():
    assert desugar(r"\expe^{\iunit z}") == r"{e}^{{i} z}"
    assert parse_or_raise(desugar(r"\expe^{\iunit z}")) == parse_or_raise("e^{i z}")


def test_extract_concepts():
    assert extract_concepts(expand_semantics(r"\expe^{\iunit \cpi} + x")) == {
        "euler-number",
        "imaginary-unit",
        "pi",
    }


def test_expand_semantics_rejects_bad_texvc():
    with pytest.raises(TexvcSyntaxError):
        expand_semantics(r"\iunit^")


def test_macro_may_not_shadow_a_command():
    with pytest.raises(MacroConfigurationError, match="collide"):
        MacroTable([MacroEntry(name="alpha", rendered_texvc="a", concept_key="alpha")])


def test_macro_must_render_valid_texvc():
    with pytest.raises(MacroConfigurationError, match="renders invalid texvc"):
        MacroTable([MacroEntry(name="broken", rendered_texvc=r"\frac{a}", concept_key="b")])


def test_macro_table_from_file(tmp_path):
    path = tmp_path / "macros.tsv"
    path.write_text("# macro\trendered\tconcept\turl\nzetazero\t\\zeta\tzeta-zero\t\n", encoding="utf-8")

    table = MacroTable.from_file(path)

    assert len(table) == 1
    assert table.fallback_url("zetazero") is None
    assert table.by_concept("zeta-zero").name == "zetazero"
