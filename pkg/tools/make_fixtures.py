"""Regenerate the committed test fixtures.

Produces three offline datasets (reference tables plus a content-addressed
page cache) and a query file:

  two-cluster    40 synthetic docs over two disjoint 5-word vocabularies;
                 exercises training determinism and topic recovery.
  supply-chain   12 HTML incident articles about software supply chain
                 attacks; doc-00002 is a near-duplicate of the query file,
                 so a compare must rank it #1 above the highlight threshold.
  web-attacks    39 docs over three attack-theme vocabularies plus one
                 release-note-flavored doc.  Trained with exactly 4 topics
                 (one per structure) the corpus centroid concentrates on
                 the attack topics while the query's mixture lands on the
                 marginal one, so the relevance gate skips the dataset.

Run from the repo root:  python tools/make_fixtures.py
"""
from __future__ import annotations

import csv
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from pipeguard.ingest import cache_key
from pipeguard.textprep import PrepConfig, RawDocument, preprocess_document

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"
CACHE = FIXTURES / "cache"
TABLES = FIXTURES / "tables"

CLUSTER_A = ["phishing", "malware", "breach", "exploit", "ransomware"]
CLUSTER_B = ["encryption", "certificate", "protocol", "handshake", "cipher"]

ATTACK_THEMES = [
    ["ddos", "botnet", "amplification", "flood", "bandwidth", "volumetric", "reflector", "upstream"],
    ["lure", "spoofed", "harvesting", "credential", "victim", "login", "impersonation", "pretext"],
    ["trojan", "beacon", "implant", "dropper", "persistence", "exfiltration", "loader", "backdoor"],
]

_SHARED_BODY = """\
This maintenance update resolves several security issues found during the
scheduled dependency audit of the release pipeline.

The update patches a critical vulnerability in the package registry client
that allowed a malicious dependency to inject unsigned artifacts into the
deployment pipeline. Build tokens with excessive permissions were rotated
and the token scope is now {scope_word} to the active repository.

The TLS certificate validation in the artifact mirror was hardened against
downgrade attacks. Requests with expired or self signed certificates are
{reject_word} before the download starts.

The container base image was upgraded to remove a known remote code
execution flaw in the bundled compression library. Checksums for every
published artifact are now signed and verified at install time.

A denial of service condition in the upload endpoint was fixed by limiting
the request body size and closing idle connections earlier. The session
cache no longer stores tokens in plain text and the cookie flags were
tightened for every authenticated route.

The bundled cryptography module was upgraded and weak cipher suites were
removed from the default server configuration. Key rotation for the
internal service mesh is now automatic and certificates renew before
expiry without manual steps.

Input validation in the webhook receiver was strengthened to stop header
injection and path traversal through crafted delivery payloads. Outbound
requests from build steps now pass through an egress proxy with an
allowlist of package mirrors.

The scheduler component received a fix for a race condition that could
duplicate deployment jobs under heavy load. Worker nodes verify the
manifest digest of every container image before starting it.

Audit logging now records every publish and yank event with the acting
account so that a compromised maintainer account can be detected quickly.
Alerts fire when a release is published from an address outside the
corporate network range.

Administrators should upgrade to this version promptly and revoke any
registry token issued before the rotation date. Consult the upgrade guide
for database migration steps and downtime expectations before starting.
"""

RELEASE_NOTES = (
    "Release Notes - Build Pipeline Service 3.10.9\n\n"
    + _SHARED_BODY.format(scope_word="restricted", reject_word="rejected")
)

NEAR_DUPLICATE = (
    "Mirror of the vendor security bulletin for Build Pipeline Service 3.10.9.\n\n"
    + _SHARED_BODY.format(scope_word="limited", reject_word="refused")
)

SUPPLY_CHAIN_ARTICLES = [
    (
        "Compromised build server pushed tainted packages",
        """Attackers gained access to the vendor build server and used the
        continuous integration pipeline to publish tainted packages to the
        public registry. The malicious build artifacts carried a backdoor
        that activated during dependency installation. Signing keys stored
        on the build server were stolen, letting the attackers sign the
        compromised packages so that checksum verification passed. The
        vendor revoked the certificate, rotated every registry token and
        audited the deployment pipeline for further tampering.""",
    ),
    (
        "Dependency confusion attack hits internal registries",
        """Researchers uploaded packages with the names of internal
        dependencies to the public registry. Build pipelines that resolved
        the public registry first pulled the malicious dependency instead
        of the internal artifact. The injected code exfiltrated environment
        variables including registry tokens and signing credentials during
        the install step. Mitigations include scoped package names, pinned
        versions and verification of the artifact checksum before the
        deployment stage.""",
    ),
    (
        "Vendor security bulletin mirror",
        NEAR_DUPLICATE,
    ),
    (
        "Typosquatting campaign targets package registry",
        """A campaign registered hundreds of packages whose names differed
        from popular libraries by one character. Developers who mistyped a
        dependency pulled a malicious package that installed a credential
        stealer. The registry removed the packages and now scans new
        uploads for near-name collisions. Teams should review dependency
        manifests and verify package signatures in the build pipeline.""",
    ),
    (
        "Stolen signing key used to distribute malware update",
        """An attacker stole the code signing key of a desktop software
        vendor and shipped a malicious update through the official update
        channel. The signed update passed certificate validation on every
        client. Detection came from anomalous network beacons after
        installation. The vendor revoked the certificate, reissued the
        signing key from a hardware module and published new checksums for
        all artifacts.""",
    ),
    (
        "CI secrets leaked through pull request builds",
        """A misconfigured pipeline exposed repository secrets to builds
        triggered by external pull requests. Attackers opened crafted pull
        requests that printed the registry token and deployment credentials
        into the build log. With the stolen token they could publish
        packages under the project name. The project moved secrets into a
        scoped vault and restricted token permissions to the release
        branch.""",
    ),
    (
        "Compression library backdoor discovered before release",
        """A maintainer account added an obfuscated backdoor to a widely
        used compression library over several releases. The backdoor
        activated during the build of downstream packages and weakened
        authentication on affected servers. The tainted versions were
        pulled from the registry and distributions reverted to a clean
        release. The incident renewed calls for reproducible builds and
        independent artifact verification.""",
    ),
    (
        "Update server hijack delivers tampered firmware",
        """Attackers compromised the update server of a network appliance
        vendor and replaced firmware images with tampered versions. The
        images were not signed, so clients installed them without
        verification. The tampered firmware opened a remote shell on the
        management interface. The vendor now signs every image, publishes
        checksums and requires certificate validation in the update
        client.""",
    ),
    (
        "Maintainer account takeover on package registry",
        """A phishing message harvested the password of a package
        maintainer. The attacker published a patched release containing a
        credential stealer that ran during installation. Registry audit
        logs recorded the publish event from an unusual address, which
        triggered the takedown. The registry now requires hardware tokens
        for maintainers of popular packages and signs release metadata.""",
    ),
    (
        "Build cache poisoning in shared runners",
        """A shared continuous integration runner allowed one project to
        poison the build cache of another. The poisoned cache injected a
        malicious artifact into the victim project's release build. The
        platform isolated caches per repository and added checksum
        verification of cached artifacts before reuse in the deployment
        pipeline.""",
    ),
    (
        "Malicious install scripts in registry packages",
        """Dozens of packages in the public registry contained install
        scripts that downloaded a second stage payload during dependency
        installation. The payload harvested cloud credentials from the
        build environment. Registry operators disabled install scripts by
        default and teams now install dependencies with scripts ignored in
        the pipeline.""",
    ),
    (
        "Unsigned artifact injection through mirror network",
        """A regional mirror of the package registry served modified
        artifacts whose checksums did not match the upstream release.
        Clients that skipped checksum verification installed the modified
        packages. The mirror operator keys were revoked and the registry
        now requires signed artifacts end to end, with certificate
        validation enforced by the default client.""",
    ),
]


def _page(title: str, body: str) -> str:
    paragraphs = "".join(
        f"<p>{chunk.strip()}</p>\n" for chunk in body.split("\n\n") if chunk.strip()
    )
    return (
        "<!DOCTYPE html>\n<html>\n<head>\n"
        f"<title>{title}</title>\n"
        "<style>body { font-family: serif; }</style>\n"
        '<script>console.log("analytics stub");</script>\n'
        "</head>\n<body>\n"
        f"<h1>{title}</h1>\n{paragraphs}"
        "<noscript>enable javascript</noscript>\n"
        "</body>\n</html>\n"
    )


def _salad(rng: random.Random, vocab: list[str], length: int) -> str:
    words = [rng.choice(vocab) for _ in range(length)]
    lines = [" ".join(words[i : i + 10]) for i in range(0, len(words), 10)]
    return "\n".join(lines) + "\n"


def _write_cached(url: str, body: str, content_type: str) -> None:
    CACHE.mkdir(parents=True, exist_ok=True)
    key = cache_key(url)
    (CACHE / key).write_bytes(body.encode("utf-8"))
    (CACHE / (key + ".meta")).write_text(
        json.dumps({"url": url, "content_type": content_type, "status": 200}), "utf-8"
    )


def _write_table(name: str, rows: list[dict]) -> None:
    TABLES.mkdir(parents=True, exist_ok=True)
    with open(TABLES / name, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=["reference", "title", "date"])
        writer.writeheader()
        writer.writerows(rows)


def build_two_cluster(rng: random.Random) -> None:
    rows = []
    for index in range(40):
        vocab = CLUSTER_A if index < 20 else CLUSTER_B
        url = f"https://fixtures.invalid/two-cluster/{index:02d}"
        _write_cached(url, _salad(rng, vocab, 50), "text/plain")
        rows.append(
            {
                "reference": url,
                "title": f"incident log {index:02d}",
                "date": f"2025-01-{(index % 28) + 1:02d}",
            }
        )
    # one reference with no cached page: exercises per-row failure tolerance
    rows.append(
        {
            "reference": "https://fixtures.invalid/two-cluster/broken",
            "title": "dead link",
            "date": "2025-02-01",
        }
    )
    _write_table("two_cluster.csv", rows)


def build_supply_chain() -> None:
    rows = []
    for index, (title, body) in enumerate(SUPPLY_CHAIN_ARTICLES):
        url = f"https://fixtures.invalid/supply-chain/{index:02d}"
        _write_cached(url, _page(title, body), "text/html; charset=utf-8")
        rows.append(
            {
                "reference": url,
                "title": title,
                "date": f"2025-03-{(index % 28) + 1:02d}",
            }
        )
    _write_table("supply_chain.csv", rows)


def build_web_attacks(rng: random.Random) -> None:
    rows = []
    index = 0
    for theme in ATTACK_THEMES:
        for _ in range(13):
            url = f"https://fixtures.invalid/web-attacks/{index:02d}"
            _write_cached(url, _salad(rng, theme, 800), "text/plain")
            rows.append(
                {
                    "reference": url,
                    "title": f"attack report {index:02d}",
                    "date": f"2025-04-{(index % 28) + 1:02d}",
                }
            )
            index += 1
    # One doc built from release-note vocabulary: gives the query in-dictionary
    # terms that concentrate on a marginal topic, so the gate has something
    # to measure (and to skip).
    query_tokens = list(
        preprocess_document(
            RawDocument(doc_id="q", source="q", raw_text=RELEASE_NOTES), PrepConfig()
        ).tokens
    )
    url = f"https://fixtures.invalid/web-attacks/{index:02d}"
    _write_cached(url, _salad(rng, query_tokens, 800), "text/plain")
    rows.append(
        {
            "reference": url,
            "title": "patch bulletin roundup",
            "date": "2025-04-30",
        }
    )
    _write_table("web_attacks.csv", rows)


def main() -> None:
    rng = random.Random(2026)
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / "release_notes.txt").write_text(RELEASE_NOTES, "utf-8")
    build_two_cluster(rng)
    build_supply_chain()
    build_web_attacks(rng)
    pages = len(list(CACHE.glob("*"))) // 2
    print(f"wrote {pages} cached pages under {CACHE}")


if __name__ == "__main__":
    main()
