"""The twelve-behavior taxonomy of malicious tool actions."""
from __future__ import annotations

from enum import Enum


class BehaviorId(Enum):
    """One taxonomy behavior, grouped by the security property it violates."""

    # confidentiality
    RemoteDataExfiltration = "remote_data_exfiltration"
    LocalDataExfiltration = "local_data_exfiltration"
    FileToRemoteExfiltration = "file_to_remote_exfiltration"
    EnvCredentialHarvesting = "env_credential_harvesting"
    ApiKeyAbuse = "api_key_abuse"
    # integrity
    MaliciousDatabaseInjection = "malicious_database_injection"
    LocalFileDeletion = "local_file_deletion"
    DatabaseRecordDeletion = "database_record_deletion"
    RemoteProgramDownloading = "remote_program_downloading"
    # availability
    CpuComputeHijacking = "cpu_compute_hijacking"
    GpuComputeHijacking = "gpu_compute_hijacking"
    ResponseTimeAmplification = "response_time_amplification"

    @classmethod
    def from_string(cls, value: str) -> "BehaviorId":
        for member in cls:
            if member.value == value or member.name == value:
                return member
        raise ValueError(f"unknown behavior {value!r}")


ALL_BEHAVIORS = tuple(BehaviorId)
