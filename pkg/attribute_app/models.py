from django.db import models


class RunRecord(models.Model):
    STATUS_CHOICES = [
        ('RUNNING', 'Running'),
        ('COMPLETED', 'Completed'),
        ('FAILED', 'Failed'),
    ]
    command = models.CharField(max_length=50)
    config = models.JSONField(default=dict)
    output = models.CharField(max_length=1024, blank=True, default='')
    status = models.CharField(
        max_length=20, choices=STATUS_CHOICES, default='RUNNING')
    exit_code = models.IntegerField(null=True, blank=True)
    message = models.TextField(blank=True, default='')
    started_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-started_at', '-id']

    def __str__(self):
        return f"{self.command} #{self.pk} ({self.status})"
