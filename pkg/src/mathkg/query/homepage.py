"""Formula homepages: one HTML page with embedded MathML plus a JSON sidecar."""

import logging
from pathlib import Path
from typing import Callable

from lxml import etree
from lxml.builder import E
from pydantic import BaseModel, ConfigDict

from mathkg.core.exceptions import QueryError
from mathkg.kg.models import EntityId, ExternalIdVal, ItemRef, MathVal, UrlVal
from mathkg.kg.schema import CoreProperties, find_property
from mathkg.kg.store import KnowledgeGraphStore
from mathkg.mathml.emitter import EmitOptions, emit_mathml
from mathkg.mathml.macros import MacroTable, expand_semantics

logger = logging.getLogger(__name__)

DEFAULT_URL_TEMPLATE = "/wiki/Item:{id}"


class LinkedConcept(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: EntityId
    label: str
    url: str


class ExternalIdLink(BaseModel):
    model_config = ConfigDict(frozen=True)

    id_type: str
    value: str
    url: str | None = None


class HomepageDoc(BaseModel):
    item: EntityId
    title: str
    texvc: str
    mathml: str
    linked_concepts: list[LinkedConcept]
    external_ids: list[ExternalIdLink]
    backlinks: list[EntityId]


def store_link_resolver(
    store: KnowledgeGraphStore, url_template: str = DEFAULT_URL_TEMPLATE
) -> Callable[[str], str | None]:
    """Concept key -> local item URL, for the one item carrying the key as label or alias."""

    def resolve(concept_key: str) -> str | None:
        found = store.find_by_label(concept_key, kind="item")
        if len(found) != 1:
            return None
        return url_template.format(id=found[0])

    return resolve


def homepage_options(
    store: KnowledgeGraphStore,
    texvc: str,
    macro_table: MacroTable | None = None,
    url_template: str = DEFAULT_URL_TEMPLATE,
) -> EmitOptions:
    return EmitOptions(
        display="block",
        resolve_links=True,
        link_resolver=store_link_resolver(store, url_template),
        macro_table=macro_table or store.macro_table,
        source=texvc,
    )


def _concept_url(store: KnowledgeGraphStore, concept: EntityId, url_template: str) -> str:
    described_at = find_property(store, CoreProperties.DESCRIBED_AT)
    if described_at is not None:
        for statement in store.statements(concept, described_at):
            if isinstance(statement.value, UrlVal):
                return statement.value.value
    return url_template.format(id=concept)


def formula_homepage(
    store: KnowledgeGraphStore,
    item: EntityId,
    macro_table: MacroTable | None = None,
    url_template: str = DEFAULT_URL_TEMPLATE,
) -> HomepageDoc:
    """
    Assembles the homepage of a formula item from its first math statement.

    Raises:
        QueryError: If ``item`` is unknown or carries no math statement.
    """
    if item not in store:
        raise QueryError(f"Unknown entity {item}")
    entity = store.get_entity(item)
    formulas = [st.value for st in entity.statements if isinstance(st.value, MathVal)]
    if not formulas:
        raise QueryError(f"{item} has no formula statement")
    texvc = formulas[0].texvc

    macro_table = macro_table or store.macro_table
    mathml = emit_mathml(
        expand_semantics(texvc, macro_table),
        homepage_options(store, texvc, macro_table, url_template),
    )

    linked: list[LinkedConcept] = []
    backlinks: list[EntityId] = []
    uses = find_property(store, CoreProperties.USES)
    if uses is not None:
        for statement in entity.statements_for(uses):
            if not isinstance(statement.value, ItemRef):
                continue
            concept = store.get_entity(statement.value.id)
            linked.append(
                LinkedConcept(
                    id=concept.id,
                    label=concept.label() or str(concept.id),
                    url=_concept_url(store, concept.id, url_template),
                )
            )
        backlinks = sorted({subject for subject, _ in store.referrers(item, uses)})

    external_ids = [
        ExternalIdLink(
            id_type=st.value.id_type,
            value=st.value.value,
            url=store.id_registry.url_for(st.value.id_type, st.value.value),
        )
        for st in entity.statements
        if isinstance(st.value, ExternalIdVal)
    ]

    return HomepageDoc(
        item=item,
        title=entity.label() or str(item),
        texvc=texvc,
        mathml=mathml,
        linked_concepts=linked,
        external_ids=external_ids,
        backlinks=backlinks,
    )


def _link_list(links: list[tuple[str, str | None]]):
    items = [E.li(E.a(text, href=url)) if url else E.li(text) for text, url in links]
    return E.ul(*items) if items else E.p("None.")


def write_homepage(doc: HomepageDoc, out_dir: str | Path) -> tuple[Path, Path]:
    """Writes ``<id>.html`` and ``<id>.json`` into ``out_dir``; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    page = E.html(
        E.head(E.meta(charset="utf-8"), E.title(doc.title)),
        E.body(
            E.h1(doc.title),
            E.div(etree.fromstring(doc.mathml), {"class": "formula"}),
            E.pre(doc.texvc, {"class": "texvc"}),
            E.h2("Concepts"),
            _link_list([(c.label, c.url) for c in doc.linked_concepts]),
            E.h2("Identifiers"),
            _link_list([(f"{x.id_type}: {x.value}", x.url) for x in doc.external_ids]),
            E.h2("Used by"),
            _link_list([(str(b), f"{b}.html") for b in doc.backlinks]),
        ),
        lang="en",
    )
    html_path = out_dir / f"{doc.item}.html"
    json_path = out_dir / f"{doc.item}.json"
    html_path.write_text(
        etree.tostring(page, doctype="<!DOCTYPE html>", encoding="unicode", pretty_print=True),
        encoding="utf-8",
    )
    json_path.write_text(doc.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote homepage of {doc.item} to {html_path}")
    return html_path, json_path
